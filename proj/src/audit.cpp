#include "duelist/audit.hpp"

#include <random>
#include <unordered_map>

#include <fmt/format.h>

#include "duelist/engine.hpp"
#include "duelist/hash.hpp"
#include "duelist/session.hpp"
#include "duelist/team.hpp"

namespace duelist {

using json = nlohmann::json;

json plant_sentinels(const json& dex_json, int count) {
  json out = dex_json;
  const auto species = dex_json.at("species");
  const auto& items = dex_json.at("items");
  if (species.empty() || items.empty() || dex_json.at("abilities").empty()) {
    throw std::invalid_argument("sentinels need a dex with species, abilities and items");
  }
  std::unordered_map<std::string, json> moves, abilities;
  for (const auto& m : dex_json.at("moves")) moves[m.at("name")] = m;
  for (const auto& a : dex_json.at("abilities")) abilities[a.at("name")] = a;

  for (int k = 0; k < count; ++k) {
    auto sp = species[static_cast<std::size_t>(k) % species.size()];
    sp["name"] = fmt::format("{}species-{}", kSentinelPrefix, k);
    json learnset = json::array();
    for (std::size_t m = 0; m < sp.at("learnset").size() && m < 4; ++m) {
      auto move = moves.at(sp["learnset"][m]);
      move["name"] = fmt::format("{}move-{}-{}", kSentinelPrefix, k, m);
      out["moves"].push_back(move);
      learnset.push_back(move["name"]);
    }
    sp["learnset"] = learnset;
    auto ability = abilities.at(sp.at("abilities").front());
    ability["name"] = fmt::format("{}ability-{}", kSentinelPrefix, k);
    out["abilities"].push_back(ability);
    sp["abilities"] = json::array({ability["name"]});
    auto item = items[static_cast<std::size_t>(k) % items.size()];
    item["name"] = fmt::format("{}item-{}", kSentinelPrefix, k);
    out["items"].push_back(item);
    out["species"].push_back(sp);
  }
  return out;
}

namespace {

bool is_sentinel(const std::string& name) { return name.rfind(kSentinelPrefix, 0) == 0; }

enum class Property { Species, Move, Ability, Item };

struct Owner {
  Property what;
  SpeciesId species;
  std::uint16_t id = 0;
};

class Scanner {
 public:
  explicit Scanner(const Dex& dex) {
    for (const auto& sp : dex.all_species()) {
      if (!is_sentinel(sp.name)) continue;
      names_[sp.name] = {Property::Species, sp.id, sp.id.value};
      for (auto m : sp.learnset) names_[dex.move(m).name] = {Property::Move, sp.id, m.value};
      for (auto a : sp.abilities) names_[dex.ability(a).name] = {Property::Ability, sp.id, a.value};
      const auto k = sp.name.substr(sp.name.rfind('-') + 1);
      const auto item = dex.find_item(std::string(kSentinelPrefix) + "item-" + k);
      if (item) names_[dex.item(*item).name] = {Property::Item, sp.id, item->value};
    }
  }

  // Counts sentinel names in `bytes` and returns the first one not yet
  // revealed to side 0, if any.
  std::string scan(const std::string& bytes, const BattleSession& session, HidingReport& report) const {
    const std::string needle = std::string("\"") + kSentinelPrefix;
    std::string leak;
    for (auto pos = bytes.find(needle); pos != std::string::npos; pos = bytes.find(needle, pos + 1)) {
      const auto end = bytes.find('"', pos + 1);
      const auto name = bytes.substr(pos + 1, end - pos - 1);
      if (revealed(name, session)) {
        ++report.mentions;
      } else if (leak.empty()) {
        leak = name;
      }
    }
    return leak;
  }

 private:
  bool revealed(const std::string& name, const BattleSession& session) const {
    const auto it = names_.find(name);
    if (it == names_.end()) return false;
    const auto& team = session.team(1);
    const auto& owner = it->second;
    for (std::size_t i = 0; i < team.size(); ++i) {
      if (team[i].species != owner.species) continue;
      const auto& r = session.ledger().slot(1, static_cast<int>(i));
      switch (owner.what) {
        case Property::Species: return r.seen;
        case Property::Move:
          return std::any_of(r.moves.begin(), r.moves.end(), [&](const auto& m) { return m.first.value == owner.id; });
        case Property::Ability: return r.ability && r.ability->value == owner.id;
        case Property::Item: return r.item && r.item->value == owner.id;
      }
    }
    return false;
  }

  std::unordered_map<std::string, Owner> names_;
};

Team sentinel_team(const Dex& dex, const std::vector<SpeciesId>& pool, int size, std::mt19937_64& rng) {
  auto picks = pool;
  std::shuffle(picks.begin(), picks.end(), rng);
  Team team;
  for (int i = 0; i < size; ++i) {
    const auto& sp = dex.species(picks[i]);
    Build b;
    b.species = sp.id;
    b.moves = sp.learnset;
    b.ability = sp.abilities.front();
    const auto k = sp.name.substr(sp.name.rfind('-') + 1);
    b.item = dex.find_item(std::string(kSentinelPrefix) + "item-" + k).value_or(kNoItem);
    team.push_back(b);
  }
  return team;
}

Team plain_team(const Dex& dex, const std::vector<SpeciesId>& pool, int size, std::mt19937_64& rng) {
  auto picks = pool;
  std::shuffle(picks.begin(), picks.end(), rng);
  Team team;
  for (int i = 0; i < size; ++i) {
    auto b = random_build(dex, picks[i], rng);
    if (b.item != kNoItem && is_sentinel(dex.item(b.item).name)) b.item = kNoItem;
    team.push_back(b);
  }
  return team;
}

}  // namespace

HidingReport audit_hiding(const Dex& dex, const HidingAuditConfig& cfg) {
  std::vector<SpeciesId> sentinels, plain;
  for (const auto& sp : dex.all_species()) (is_sentinel(sp.name) ? sentinels : plain).push_back(sp.id);
  if (static_cast<int>(sentinels.size()) < cfg.team_size || static_cast<int>(plain.size()) < cfg.team_size) {
    throw std::invalid_argument("dex has too few sentinel or plain species for the audit");
  }
  const Scanner scanner(dex);
  HidingReport report;
  std::uniform_real_distribution<double> u(0, 1);
  for (int b = 0; b < cfg.battles; ++b) {
    const auto seed = mix64(cfg.seed + static_cast<std::uint64_t>(b));
    std::mt19937_64 rng(seed);
    const auto team0 = plain_team(dex, plain, cfg.team_size, rng);
    const auto team1 = sentinel_team(dex, sentinels, cfg.team_size, rng);
    BattleSession session(dex, team0, team1, seed, {false, 1000, cfg.max_turns});

    auto check = [&](const std::vector<Outgoing>& frames) {
      for (const auto& f : frames) {
        if (f.side != 0) continue;
        std::string bytes;
        if (cfg.tamper) {
          auto copy = f.frame;
          cfg.tamper(session, copy);
          bytes = copy.dump();
        } else {
          bytes = f.frame.dump();
        }
        ++report.frames;
        report.bytes += bytes.size();
        if (auto leak = scanner.scan(bytes, session, report); !leak.empty()) {
          if (report.leaks++ == 0) {
            report.first_leak = fmt::format("battle {} ({}): {} in {}", b, seed, leak, bytes.substr(0, 400));
          }
        }
      }
    };

    check(session.start());
    while (!session.finished()) {
      for (int side = 0; side < 2 && !session.finished(); ++side) {
        if (!session.awaiting(side)) continue;
        if (u(rng) < cfg.timeout_rate) {
          check(session.timeout(side));
          continue;
        }
        if (u(rng) < cfg.illegal_rate) check(session.choose(side, Action::switch_to(kMaxTeam)));
        const auto legal = legal_actions(dex, session.state(), side);
        check(session.choose(side, legal[std::uniform_int_distribution<std::size_t>(0, legal.size() - 1)(rng)]));
      }
    }
    ++report.battles;
  }
  return report;
}

}  // namespace duelist
