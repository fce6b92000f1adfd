#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "duelist/ids.hpp"

namespace duelist {

// Effectiveness multiplier per (attacking type, defending type).
class TypeChart {
 public:
  TypeChart() = default;
  TypeChart(std::vector<std::string> names, std::vector<std::vector<double>> cells);

  int type_count() const { return static_cast<int>(names_.size()); }
  double at(TypeId attack, TypeId defend) const {
    return cells_[attack.value * names_.size() + defend.value];
  }
  const std::string& name(TypeId t) const { return names_.at(t.value); }
  std::optional<TypeId> find(const std::string& name) const;

 private:
  std::vector<std::string> names_;
  std::vector<double> cells_;
};

struct StatBlock {
  std::uint16_t hp = 0;
  std::uint16_t atk = 0;
  std::uint16_t def = 0;
  std::uint16_t spa = 0;
  std::uint16_t spd = 0;
  std::uint16_t spe = 0;

  std::uint16_t get(Stat s) const;
  bool operator==(const StatBlock&) const = default;
};

enum class EffectKind : std::uint8_t { None, Boost, InflictStatus, Heal, SetWeather, SetSideCondition };
enum class EffectTarget : std::uint8_t { Self, Foe };
enum class SideCondition : std::uint8_t { Tailwind, ToxicSpikes };

// Tagged move effect. Only the fields relevant to `kind` are meaningful.
struct MoveEffect {
  EffectKind kind = EffectKind::None;
  EffectTarget target = EffectTarget::Foe;
  double chance = 1.0;
  std::array<std::int8_t, kStageStats> stage_changes{};  // Boost
  Status status = Status::None;                          // InflictStatus
  double heal_fraction = 0.0;                            // Heal
  Weather weather = Weather::None;                       // SetWeather
  SideCondition condition = SideCondition::Tailwind;     // SetSideCondition
};

struct MoveDef {
  std::string name;
  TypeId type;
  Category category = Category::Physical;
  int power = 0;
  double accuracy = 1.0;
  int pp = 1;
  int priority = 0;
  MoveEffect effect;
};

enum class AbilityKind : std::uint8_t { None, PinchBoost, TypeImmunity, WeatherSpeed, StatusImmunity, Resist };

struct AbilityDef {
  std::string name;
  AbilityKind kind = AbilityKind::None;
  std::vector<TypeId> types;
  Weather weather = Weather::None;
  Status status = Status::None;
};

enum class ItemKind : std::uint8_t { Leftovers, PinchHeal, SuperEffectiveBoost, TypeBoost };

struct ItemDef {
  std::string name;
  ItemKind kind = ItemKind::Leftovers;
  std::optional<TypeId> type;
};

struct SpeciesDef {
  SpeciesId id;
  std::string name;
  std::vector<TypeId> types;
  StatBlock base;
  std::vector<AbilityId> abilities;
  std::vector<MoveId> learnset;  // sorted by id

  bool has_type(TypeId t) const;
  bool can_learn(MoveId m) const;
  bool has_ability(AbilityId a) const;
};

// Immutable game data: types, moves, abilities, items and species.
class Dex {
 public:
  Dex(TypeChart chart, std::vector<MoveDef> moves, std::vector<AbilityDef> abilities,
      std::vector<ItemDef> items, std::vector<SpeciesDef> species);

  const TypeChart& chart() const { return chart_; }
  const MoveDef& move(MoveId id) const { return moves_[id.value]; }
  const AbilityDef& ability(AbilityId id) const { return abilities_[id.value]; }
  const ItemDef& item(ItemId id) const { return items_[id.value]; }
  const SpeciesDef& species(SpeciesId id) const { return species_[id.value]; }

  std::size_t move_count() const { return moves_.size(); }
  std::size_t ability_count() const { return abilities_.size(); }
  std::size_t item_count() const { return items_.size(); }
  std::size_t species_count() const { return species_.size(); }
  const std::vector<SpeciesDef>& all_species() const { return species_; }

  std::optional<MoveId> find_move(const std::string& name) const;
  std::optional<SpeciesId> find_species(const std::string& name) const;
  std::optional<AbilityId> find_ability(const std::string& name) const;
  std::optional<ItemId> find_item(const std::string& name) const;

  std::optional<TypeId> water() const { return water_; }
  std::optional<TypeId> fire() const { return fire_; }

  // Stable fingerprint of the loaded content, hex encoded.
  const std::string& content_hash() const { return hash_; }

 private:
  TypeChart chart_;
  std::vector<MoveDef> moves_;
  std::vector<AbilityDef> abilities_;
  std::vector<ItemDef> items_;
  std::vector<SpeciesDef> species_;
  std::unordered_map<std::string, MoveId> move_index_;
  std::unordered_map<std::string, SpeciesId> species_index_;
  std::unordered_map<std::string, AbilityId> ability_index_;
  std::unordered_map<std::string, ItemId> item_index_;
  std::optional<TypeId> water_;
  std::optional<TypeId> fire_;
  std::string hash_;
};

// Loads a dex JSON file. When `type_chart_file` is given, its {types, chart}
// override the ones embedded in the dex file.
Dex load_dex(const std::filesystem::path& dex_file,
             const std::optional<std::filesystem::path>& type_chart_file = std::nullopt);

// Same as load_dex, from in-memory JSON text. `origin` labels error messages.
Dex load_dex_text(const std::string& dex_json, const std::string* chart_json,
                  const std::string& origin);

}  // namespace duelist
