#pragma once

#include <compare>
#include <concepts>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace duelist {

// Small strongly-typed index into one of the dex tables.
template <typename Tag>
struct Id {
  std::uint16_t value = 0;

  constexpr Id() = default;
  template <std::integral T>
  constexpr explicit Id(T v) : value(static_cast<std::uint16_t>(v)) {}

  constexpr auto operator<=>(const Id&) const = default;
};

struct TypeTag {};
struct MoveTag {};
struct SpeciesTag {};
struct AbilityTag {};
struct ItemTag {};

using TypeId = Id<TypeTag>;
using MoveId = Id<MoveTag>;
using SpeciesId = Id<SpeciesTag>;
using AbilityId = Id<AbilityTag>;
using ItemId = Id<ItemTag>;

// Sentinel for "holds no item".
inline constexpr ItemId kNoItem{std::uint16_t{0xFFFF}};

enum class Category : std::uint8_t { Physical, Special, Status };
enum class Status : std::uint8_t { None, Burn, Poison, Paralysis };
enum class Weather : std::uint8_t { None, Rain, Sun };

// Non-HP stats that carry stages.
enum class Stat : std::uint8_t { Atk = 0, Def = 1, Spa = 2, Spd = 3, Spe = 4 };
inline constexpr int kStageStats = 5;

inline constexpr int kMaxTeam = 6;
inline constexpr int kMaxMoves = 4;

class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an operation is applied to a state that does not admit it.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

const char* to_string(Category c);
const char* to_string(Status s);
const char* to_string(Weather w);
const char* to_string(Stat s);

Category category_from_string(const std::string& s);
Status status_from_string(const std::string& s);
Weather weather_from_string(const std::string& s);
Stat stat_from_string(const std::string& s);

}  // namespace duelist

template <typename Tag>
struct std::hash<duelist::Id<Tag>> {
  std::size_t operator()(const duelist::Id<Tag>& id) const noexcept { return id.value; }
};
