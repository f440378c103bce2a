#pragma once

#include <algorithm>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "qhedge/error.hpp"

namespace qhedge {

/// Largest total dimension any operator may have. Everything is dense.
inline constexpr std::size_t kMaxDimension = 256;

struct Space {
  std::string label;
  std::size_t dim = 1;

  friend bool operator==(const Space&, const Space&) = default;
};

/// Ordered tensor factors, addressed by label.
///
/// Operators in this library never refer to factors by position; every
/// cross-space operation resolves labels against this list.
class SpaceList {
 public:
  SpaceList() = default;
  SpaceList(std::initializer_list<Space> entries) : SpaceList(std::vector<Space>(entries)) {}
  explicit SpaceList(std::vector<Space> entries) : entries_(std::move(entries)) {
    std::unordered_set<std::string> seen;
    for (const auto& s : entries_) {
      if (s.dim < 1) throw InputError("space '" + s.label + "' has dimension 0");
      if (s.label.empty()) throw InputError("space labels must be non-empty");
      if (!seen.insert(s.label).second) throw InputError("duplicate space label '" + s.label + "'");
    }
  }

  const std::vector<Space>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Space& operator[](std::size_t i) const { return entries_[i]; }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  std::size_t total_dim() const {
    std::size_t d = 1;
    for (const auto& s : entries_) d *= s.dim;
    return d;
  }

  bool contains(const std::string& label) const { return find(label) != entries_.size(); }

  std::size_t index_of(const std::string& label) const {
    auto i = find(label);
    if (i == entries_.size()) throw InputError("unknown space label '" + label + "'");
    return i;
  }

  std::size_t dim_of(const std::string& label) const { return entries_[index_of(label)].dim; }

  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& s : entries_) out.push_back(s.label);
    return out;
  }

  /// Same labels with the same dimensions, in any order.
  bool same_set(const SpaceList& other) const {
    if (other.size() != size()) return false;
    return std::all_of(entries_.begin(), entries_.end(), [&](const Space& s) {
      auto i = other.find(s.label);
      return i != other.size() && other.entries_[i].dim == s.dim;
    });
  }

  /// Entries whose labels are not in `labels`, order preserved.
  SpaceList without(const std::vector<std::string>& labels) const {
    std::vector<Space> out;
    for (const auto& s : entries_)
      if (std::find(labels.begin(), labels.end(), s.label) == labels.end()) out.push_back(s);
    return SpaceList(std::move(out));
  }

  /// The entries named in `labels`, in the order given.
  SpaceList select(const std::vector<std::string>& labels) const {
    std::vector<Space> out;
    for (const auto& l : labels) out.push_back(entries_[index_of(l)]);
    return SpaceList(std::move(out));
  }

  /// Every label suffixed, e.g. for the m-th parallel copy.
  SpaceList suffixed(const std::string& suffix) const {
    std::vector<Space> out;
    for (const auto& s : entries_) out.push_back({s.label + suffix, s.dim});
    return SpaceList(std::move(out));
  }

  friend SpaceList concat(const SpaceList& a, const SpaceList& b) {
    std::vector<Space> out = a.entries_;
    out.insert(out.end(), b.entries_.begin(), b.entries_.end());
    return SpaceList(std::move(out));
  }

  friend bool operator==(const SpaceList&, const SpaceList&) = default;

 private:
  std::size_t find(const std::string& label) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].label == label) return i;
    return entries_.size();
  }

  std::vector<Space> entries_;
};

inline std::string describe(const SpaceList& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += s[i].label + ":" + std::to_string(s[i].dim);
  }
  return out + "]";
}

}  // namespace qhedge
