#include "duelist/dex.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "duelist/hash.hpp"

namespace duelist {

using nlohmann::json;

namespace {

class Loader {
 public:
  explicit Loader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    throw LoadError(origin_ + ": " + path + ": " + msg);
  }

  const json& field(const json& obj, const char* key, const std::string& path) const {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(path, std::string("missing field '") + key + "'");
    return *it;
  }

  std::string str(const json& obj, const char* key, const std::string& path) const {
    const auto& v = field(obj, key, path);
    if (!v.is_string()) fail(path + "." + key, "expected a string");
    return v.get<std::string>();
  }

  double num(const json& obj, const char* key, const std::string& path) const {
    const auto& v = field(obj, key, path);
    if (!v.is_number()) fail(path + "." + key, "expected a number");
    return v.get<double>();
  }

  int integer(const json& obj, const char* key, const std::string& path) const {
    const auto& v = field(obj, key, path);
    if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
    return v.get<int>();
  }

  const json& array(const json& obj, const char* key, const std::string& path) const {
    const auto& v = field(obj, key, path);
    if (!v.is_array()) fail(path + "." + key, "expected an array");
    return v;
  }

  TypeId type(const TypeChart& chart, const std::string& name, const std::string& path) const {
    auto t = chart.find(name);
    if (!t) fail(path, "unknown type '" + name + "'");
    return *t;
  }

  std::string origin_;
};

TypeChart parse_chart(const Loader& ld, const json& root) {
  const auto& types = ld.array(root, "types", "$");
  const auto& chart = ld.array(root, "chart", "$");
  if (types.empty()) ld.fail("$.types", "no types");
  std::vector<std::string> names;
  for (std::size_t i = 0; i < types.size(); ++i) {
    if (!types[i].is_string()) ld.fail("$.types[" + std::to_string(i) + "]", "expected a string");
    names.push_back(types[i].get<std::string>());
  }
  if (chart.size() != names.size()) ld.fail("$.chart", "chart must be square over the type list");
  std::vector<std::vector<double>> cells;
  for (std::size_t r = 0; r < chart.size(); ++r) {
    const std::string path = "$.chart[" + std::to_string(r) + "]";
    if (!chart[r].is_array() || chart[r].size() != names.size()) ld.fail(path, "chart must be square");
    std::vector<double> row;
    for (std::size_t c = 0; c < chart[r].size(); ++c) {
      if (!chart[r][c].is_number()) ld.fail(path, "expected numbers");
      double v = chart[r][c].get<double>();
      if (v != 0.0 && v != 0.5 && v != 1.0 && v != 2.0) {
        ld.fail(path + "[" + std::to_string(c) + "]", "multiplier must be one of 0, 0.5, 1, 2");
      }
      row.push_back(v);
    }
    cells.push_back(std::move(row));
  }
  return TypeChart(std::move(names), std::move(cells));
}

MoveEffect parse_effect(const Loader& ld, const json& e, const std::string& path) {
  MoveEffect fx;
  const std::string kind = ld.str(e, "kind", path);
  if (e.contains("chance")) fx.chance = ld.num(e, "chance", path);
  if (fx.chance <= 0.0 || fx.chance > 1.0) ld.fail(path + ".chance", "must be in (0, 1]");
  try {
    if (kind == "boost") {
      fx.kind = EffectKind::Boost;
      const std::string target = ld.str(e, "target", path);
      if (target != "self" && target != "foe") ld.fail(path + ".target", "expected 'self' or 'foe'");
      fx.target = target == "self" ? EffectTarget::Self : EffectTarget::Foe;
      const auto& changes = ld.field(e, "changes", path);
      if (!changes.is_object() || changes.empty()) ld.fail(path + ".changes", "expected a non-empty object");
      for (auto it = changes.begin(); it != changes.end(); ++it) {
        Stat s = stat_from_string(it.key());
        fx.stage_changes[static_cast<int>(s)] = static_cast<std::int8_t>(it.value().get<int>());
      }
    } else if (kind == "status") {
      fx.kind = EffectKind::InflictStatus;
      fx.target = EffectTarget::Foe;
      fx.status = status_from_string(ld.str(e, "status", path));
      if (fx.status == Status::None) ld.fail(path + ".status", "status must not be 'none'");
    } else if (kind == "heal") {
      fx.kind = EffectKind::Heal;
      fx.target = EffectTarget::Self;
      fx.heal_fraction = ld.num(e, "fraction", path);
      if (fx.heal_fraction <= 0.0 || fx.heal_fraction > 1.0) ld.fail(path + ".fraction", "must be in (0, 1]");
    } else if (kind == "weather") {
      fx.kind = EffectKind::SetWeather;
      fx.target = EffectTarget::Self;
      fx.weather = weather_from_string(ld.str(e, "weather", path));
      if (fx.weather == Weather::None) ld.fail(path + ".weather", "weather must not be 'none'");
    } else if (kind == "side") {
      fx.kind = EffectKind::SetSideCondition;
      const std::string c = ld.str(e, "condition", path);
      if (c == "tailwind") {
        fx.condition = SideCondition::Tailwind;
        fx.target = EffectTarget::Self;
      } else if (c == "toxic_spikes") {
        fx.condition = SideCondition::ToxicSpikes;
        fx.target = EffectTarget::Foe;
      } else {
        ld.fail(path + ".condition", "unknown side condition '" + c + "'");
      }
    } else {
      ld.fail(path + ".kind", "unknown effect kind '" + kind + "'");
    }
  } catch (const std::invalid_argument& err) {
    ld.fail(path, err.what());
  }
  return fx;
}

std::vector<MoveDef> parse_moves(const Loader& ld, const json& root, const TypeChart& chart) {
  const auto& arr = ld.array(root, "moves", "$");
  std::vector<MoveDef> moves;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "$.moves[" + std::to_string(i) + "]";
    const json& m = arr[i];
    MoveDef def;
    def.name = ld.str(m, "name", path);
    def.type = ld.type(chart, ld.str(m, "type", path), path + ".type");
    try {
      def.category = category_from_string(ld.str(m, "category", path));
    } catch (const std::invalid_argument& e) {
      ld.fail(path + ".category", e.what());
    }
    def.power = ld.integer(m, "power", path);
    def.accuracy = ld.num(m, "accuracy", path);
    def.pp = ld.integer(m, "pp", path);
    def.priority = m.contains("priority") ? ld.integer(m, "priority", path) : 0;
    if (def.power < 0) ld.fail(path + ".power", "must be >= 0");
    if (def.category == Category::Status && def.power != 0) ld.fail(path + ".power", "status moves have power 0");
    if (def.category != Category::Status && def.power == 0) ld.fail(path + ".power", "damaging moves need power > 0");
    if (def.accuracy <= 0.0 || def.accuracy > 1.0) ld.fail(path + ".accuracy", "must be in (0, 1]");
    if (def.pp < 1 || def.pp > 64) ld.fail(path + ".pp", "must be in [1, 64]");
    if (def.priority < -7 || def.priority > 5) ld.fail(path + ".priority", "must be in [-7, 5]");
    if (m.contains("effect")) def.effect = parse_effect(ld, m["effect"], path + ".effect");
    if (def.category == Category::Status && def.effect.kind == EffectKind::None) {
      ld.fail(path, "status move without an effect");
    }
    moves.push_back(std::move(def));
  }
  return moves;
}

std::vector<AbilityDef> parse_abilities(const Loader& ld, const json& root, const TypeChart& chart) {
  std::vector<AbilityDef> out;
  if (!root.contains("abilities")) {
    out.push_back({"no-ability", AbilityKind::None, {}, Weather::None, Status::None});
    return out;
  }
  const auto& arr = ld.array(root, "abilities", "$");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "$.abilities[" + std::to_string(i) + "]";
    AbilityDef a;
    a.name = ld.str(arr[i], "name", path);
    const std::string kind = ld.str(arr[i], "kind", path);
    if (kind == "none") {
      a.kind = AbilityKind::None;
    } else if (kind == "pinch_boost" || kind == "type_immunity") {
      a.kind = kind == "pinch_boost" ? AbilityKind::PinchBoost : AbilityKind::TypeImmunity;
      a.types.push_back(ld.type(chart, ld.str(arr[i], "type", path), path + ".type"));
    } else if (kind == "resist") {
      a.kind = AbilityKind::Resist;
      const auto& ts = ld.array(arr[i], "types", path);
      for (const auto& t : ts) a.types.push_back(ld.type(chart, t.get<std::string>(), path + ".types"));
    } else if (kind == "weather_speed") {
      a.kind = AbilityKind::WeatherSpeed;
      a.weather = weather_from_string(ld.str(arr[i], "weather", path));
    } else if (kind == "status_immunity") {
      a.kind = AbilityKind::StatusImmunity;
      a.status = status_from_string(ld.str(arr[i], "status", path));
    } else {
      ld.fail(path + ".kind", "unknown ability kind '" + kind + "'");
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<ItemDef> parse_items(const Loader& ld, const json& root, const TypeChart& chart) {
  std::vector<ItemDef> out;
  if (!root.contains("items")) return out;
  const auto& arr = ld.array(root, "items", "$");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "$.items[" + std::to_string(i) + "]";
    ItemDef it;
    it.name = ld.str(arr[i], "name", path);
    const std::string kind = ld.str(arr[i], "kind", path);
    if (kind == "leftovers") {
      it.kind = ItemKind::Leftovers;
    } else if (kind == "pinch_heal") {
      it.kind = ItemKind::PinchHeal;
    } else if (kind == "super_effective_boost") {
      it.kind = ItemKind::SuperEffectiveBoost;
    } else if (kind == "type_boost") {
      it.kind = ItemKind::TypeBoost;
      it.type = ld.type(chart, ld.str(arr[i], "type", path), path + ".type");
    } else {
      ld.fail(path + ".kind", "unknown item kind '" + kind + "'");
    }
    out.push_back(std::move(it));
  }
  return out;
}

template <typename IdT, typename Defs>
std::unordered_map<std::string, IdT> index_names(const Loader& ld, const Defs& defs, const char* table) {
  std::unordered_map<std::string, IdT> idx;
  for (std::size_t i = 0; i < defs.size(); ++i) {
    if (!idx.emplace(defs[i].name, IdT(i)).second) {
      ld.fail(std::string("$.") + table, "duplicate name '" + defs[i].name + "'");
    }
  }
  return idx;
}

std::vector<SpeciesDef> parse_species(const Loader& ld, const json& root, const TypeChart& chart,
                                      const std::vector<MoveDef>& moves,
                                      const std::vector<AbilityDef>& abilities) {
  const auto& arr = ld.array(root, "species", "$");
  if (arr.empty()) ld.fail("$.species", "empty dex");
  auto move_idx = index_names<MoveId>(ld, moves, "moves");
  auto ability_idx = index_names<AbilityId>(ld, abilities, "abilities");
  std::vector<SpeciesDef> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "$.species[" + std::to_string(i) + "]";
    const json& s = arr[i];
    SpeciesDef def;
    def.id = SpeciesId(i);
    def.name = ld.str(s, "name", path);
    const auto& types = ld.array(s, "types", path);
    if (types.empty() || types.size() > 2) ld.fail(path + ".types", "a species has one or two types");
    for (const auto& t : types) def.types.push_back(ld.type(chart, t.get<std::string>(), path + ".types"));
    if (def.types.size() == 2 && def.types[0] == def.types[1]) ld.fail(path + ".types", "duplicate type");
    const auto& base = ld.field(s, "base", path);
    auto stat = [&](const char* key) {
      int v = ld.integer(base, key, path + ".base");
      if (v < 0 || v > 255) ld.fail(path + ".base." + key, "must be in [0, 255]");
      return static_cast<std::uint16_t>(v);
    };
    def.base = {stat("hp"), stat("atk"), stat("def"), stat("spa"), stat("spd"), stat("spe")};
    if (def.base.hp == 0) ld.fail(path + ".base.hp", "must be > 0");
    if (abilities.size() == 1 && abilities[0].name == "no-ability" && !s.contains("abilities")) {
      def.abilities.push_back(AbilityId(0));
    } else {
      const auto& ab = ld.array(s, "abilities", path);
      if (ab.empty() || ab.size() > 3) ld.fail(path + ".abilities", "a species has one to three abilities");
      for (const auto& a : ab) {
        auto it = ability_idx.find(a.get<std::string>());
        if (it == ability_idx.end()) {
          ld.fail(path + ".abilities", "species '" + def.name + "' references unknown ability '" +
                                           a.get<std::string>() + "'");
        }
        def.abilities.push_back(it->second);
      }
    }
    const auto& ls = ld.array(s, "learnset", path);
    if (ls.empty()) ld.fail(path + ".learnset", "species '" + def.name + "' learns no moves");
    for (const auto& m : ls) {
      auto it = move_idx.find(m.get<std::string>());
      if (it == move_idx.end()) {
        ld.fail(path + ".learnset", "species '" + def.name + "' references unknown move '" +
                                        m.get<std::string>() + "'");
      }
      def.learnset.push_back(it->second);
    }
    std::sort(def.learnset.begin(), def.learnset.end());
    def.learnset.erase(std::unique(def.learnset.begin(), def.learnset.end()), def.learnset.end());
    out.push_back(std::move(def));
  }
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw LoadError(p.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TypeChart::TypeChart(std::vector<std::string> names, std::vector<std::vector<double>> cells)
    : names_(std::move(names)) {
  cells_.reserve(names_.size() * names_.size());
  for (const auto& row : cells) cells_.insert(cells_.end(), row.begin(), row.end());
}

std::optional<TypeId> TypeChart::find(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return TypeId(i);
  }
  return std::nullopt;
}

std::uint16_t StatBlock::get(Stat s) const {
  switch (s) {
    case Stat::Atk: return atk;
    case Stat::Def: return def;
    case Stat::Spa: return spa;
    case Stat::Spd: return spd;
    case Stat::Spe: return spe;
  }
  return 0;
}

bool SpeciesDef::has_type(TypeId t) const {
  return std::find(types.begin(), types.end(), t) != types.end();
}

bool SpeciesDef::can_learn(MoveId m) const {
  return std::binary_search(learnset.begin(), learnset.end(), m);
}

bool SpeciesDef::has_ability(AbilityId a) const {
  return std::find(abilities.begin(), abilities.end(), a) != abilities.end();
}

Dex::Dex(TypeChart chart, std::vector<MoveDef> moves, std::vector<AbilityDef> abilities,
         std::vector<ItemDef> items, std::vector<SpeciesDef> species)
    : chart_(std::move(chart)),
      moves_(std::move(moves)),
      abilities_(std::move(abilities)),
      items_(std::move(items)),
      species_(std::move(species)) {
  for (std::size_t i = 0; i < moves_.size(); ++i) move_index_.emplace(moves_[i].name, MoveId(i));
  for (std::size_t i = 0; i < species_.size(); ++i) species_index_.emplace(species_[i].name, SpeciesId(i));
  for (std::size_t i = 0; i < abilities_.size(); ++i) ability_index_.emplace(abilities_[i].name, AbilityId(i));
  for (std::size_t i = 0; i < items_.size(); ++i) item_index_.emplace(items_[i].name, ItemId(i));
  water_ = chart_.find("water");
  fire_ = chart_.find("fire");

  Hasher h(0x6465785f68617368ULL);
  for (int a = 0; a < chart_.type_count(); ++a) {
    h.add(chart_.name(TypeId(a)));
    for (int d = 0; d < chart_.type_count(); ++d) h.add(chart_.at(TypeId(a), TypeId(d)));
  }
  for (const auto& m : moves_) {
    h.add(m.name);
    h.add(m.type.value);
    h.add(static_cast<int>(m.category));
    h.add(m.power);
    h.add(m.accuracy);
    h.add(m.pp);
    h.add(m.priority);
    h.add(static_cast<int>(m.effect.kind));
    h.add(static_cast<int>(m.effect.target));
    h.add(m.effect.chance);
    for (auto c : m.effect.stage_changes) h.add(static_cast<int>(c));
    h.add(static_cast<int>(m.effect.status));
    h.add(m.effect.heal_fraction);
    h.add(static_cast<int>(m.effect.weather));
    h.add(static_cast<int>(m.effect.condition));
  }
  for (const auto& a : abilities_) {
    h.add(a.name);
    h.add(static_cast<int>(a.kind));
    for (auto t : a.types) h.add(t.value);
    h.add(static_cast<int>(a.weather));
    h.add(static_cast<int>(a.status));
  }
  for (const auto& it : items_) {
    h.add(it.name);
    h.add(static_cast<int>(it.kind));
    h.add(it.type ? it.type->value + 1 : 0);
  }
  for (const auto& s : species_) {
    h.add(s.name);
    for (auto t : s.types) h.add(t.value);
    h.add(s.base.hp);
    h.add(s.base.atk);
    h.add(s.base.def);
    h.add(s.base.spa);
    h.add(s.base.spd);
    h.add(s.base.spe);
    for (auto a : s.abilities) h.add(a.value);
    for (auto m : s.learnset) h.add(m.value);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.digest()));
  hash_ = buf;
}

std::optional<MoveId> Dex::find_move(const std::string& name) const {
  auto it = move_index_.find(name);
  return it == move_index_.end() ? std::nullopt : std::optional<MoveId>(it->second);
}

std::optional<SpeciesId> Dex::find_species(const std::string& name) const {
  auto it = species_index_.find(name);
  return it == species_index_.end() ? std::nullopt : std::optional<SpeciesId>(it->second);
}

std::optional<AbilityId> Dex::find_ability(const std::string& name) const {
  auto it = ability_index_.find(name);
  return it == ability_index_.end() ? std::nullopt : std::optional<AbilityId>(it->second);
}

std::optional<ItemId> Dex::find_item(const std::string& name) const {
  auto it = item_index_.find(name);
  return it == item_index_.end() ? std::nullopt : std::optional<ItemId>(it->second);
}

Dex load_dex_text(const std::string& dex_json, const std::string* chart_json, const std::string& origin) {
  Loader ld(origin);
  json root;
  try {
    root = json::parse(dex_json);
  } catch (const json::parse_error& e) {
    throw LoadError(origin + ": invalid JSON: " + e.what());
  }
  if (!root.is_object()) ld.fail("$", "expected an object");
  TypeChart chart;
  if (chart_json != nullptr) {
    json chart_root;
    try {
      chart_root = json::parse(*chart_json);
    } catch (const json::parse_error& e) {
      throw LoadError(origin + " (type chart): invalid JSON: " + e.what());
    }
    chart = parse_chart(Loader(origin + " (type chart)"), chart_root);
  } else {
    chart = parse_chart(ld, root);
  }
  auto moves = parse_moves(ld, root, chart);
  auto abilities = parse_abilities(ld, root, chart);
  auto items = parse_items(ld, root, chart);
  if (items.size() >= kNoItem.value) ld.fail("$.items", "too many items");
  index_names<ItemId>(ld, items, "items");
  auto species = parse_species(ld, root, chart, moves, abilities);
  index_names<SpeciesId>(ld, species, "species");
  return Dex(std::move(chart), std::move(moves), std::move(abilities), std::move(items), std::move(species));
}

Dex load_dex(const std::filesystem::path& dex_file, const std::optional<std::filesystem::path>& type_chart_file) {
  const std::string text = read_file(dex_file);
  if (type_chart_file) {
    const std::string chart = read_file(*type_chart_file);
    return load_dex_text(text, &chart, dex_file.string());
  }
  return load_dex_text(text, nullptr, dex_file.string());
}

}  // namespace duelist
