#ifndef TYPICLASS_CATEGORY_HPP
#define TYPICLASS_CATEGORY_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "typiclass/error.hpp"

namespace typiclass {

enum class Group : std::uint8_t { attitude, subjective_norm, pbc };

inline constexpr std::array<std::string_view, 3> kGroupNames = {"attitude", "subjective_norm", "pbc"};

inline constexpr std::array<std::string_view, 3> kGroupTitles = {
    "Attitude", "Subjective Norm", "Perceived Behavior Control"};

/// The thirteen theory-of-planned-behavior categories, in table order.
enum class Category : std::uint8_t {
  positive_outcomes,
  negative_outcomes,
  approval_significant_others,
  disapproval_significant_others,
  approval_others,
  disapproval_others,
  descriptive_norms,
  ease,
  difficulty,
  methods,
  place,
  sources_help,
  sources_promote,
};

inline constexpr std::size_t kCategoryCount = 13;

namespace detail {

struct CategoryInfo {
  std::string_view name;
  std::string_view title;
  Group group;
};

inline constexpr std::array<CategoryInfo, kCategoryCount> kCategories = {{
    {"positive_outcomes", "Positive outcomes", Group::attitude},
    {"negative_outcomes", "Negative outcomes", Group::attitude},
    {"approval_significant_others", "Approval of significant others", Group::subjective_norm},
    {"disapproval_significant_others", "Disapproval of significant others", Group::subjective_norm},
    {"approval_others", "Approval of others", Group::subjective_norm},
    {"disapproval_others", "Disapproval of others", Group::subjective_norm},
    {"descriptive_norms", "Descriptive norms", Group::subjective_norm},
    {"ease", "Ease of suicide", Group::pbc},
    {"difficulty", "Difficulty of suicide", Group::pbc},
    {"methods", "Mention of specific methods", Group::pbc},
    {"place", "Mention of specific place of suicide", Group::pbc},
    {"sources_help", "Sources of help against suicide", Group::pbc},
    {"sources_promote", "Sources that promote suicide", Group::pbc},
}};

}  // namespace detail

/// A category together with the group it belongs to. The group is always
/// derived from the category, so the pair cannot be inconsistent.
class CategoryLabel {
 public:
  constexpr explicit CategoryLabel(Category c) : category_(c) {}

  constexpr Category category() const { return category_; }
  constexpr Group group() const { return detail::kCategories[index()].group; }
  constexpr std::size_t index() const { return static_cast<std::size_t>(category_); }
  constexpr std::string_view name() const { return detail::kCategories[index()].name; }
  constexpr std::string_view title() const { return detail::kCategories[index()].title; }
  constexpr std::string_view group_name() const { return kGroupNames[static_cast<std::size_t>(group())]; }

  static constexpr CategoryLabel from_index(std::size_t i) { return CategoryLabel(static_cast<Category>(i)); }

  static std::optional<CategoryLabel> try_parse(std::string_view name) {
    for (std::size_t i = 0; i < kCategoryCount; ++i)
      if (detail::kCategories[i].name == name) return from_index(i);
    return std::nullopt;
  }

  /// Throws DataError for anything that is not one of the thirteen names.
  static CategoryLabel parse(std::string_view name) {
    if (auto label = try_parse(name)) return *label;
    throw DataError("unknown category label '" + std::string(name) + "'");
  }

  friend constexpr bool operator==(CategoryLabel, CategoryLabel) = default;
  friend constexpr auto operator<=>(CategoryLabel a, CategoryLabel b) { return a.category_ <=> b.category_; }

 private:
  Category category_;
};

inline constexpr std::array<CategoryLabel, kCategoryCount> all_categories() {
  std::array<CategoryLabel, kCategoryCount> out{
      CategoryLabel(Category::positive_outcomes), CategoryLabel(Category::negative_outcomes),
      CategoryLabel(Category::approval_significant_others), CategoryLabel(Category::disapproval_significant_others),
      CategoryLabel(Category::approval_others), CategoryLabel(Category::disapproval_others),
      CategoryLabel(Category::descriptive_norms), CategoryLabel(Category::ease),
      CategoryLabel(Category::difficulty), CategoryLabel(Category::methods),
      CategoryLabel(Category::place), CategoryLabel(Category::sources_help),
      CategoryLabel(Category::sources_promote)};
  return out;
}

}  // namespace typiclass

#endif  // TYPICLASS_CATEGORY_HPP
