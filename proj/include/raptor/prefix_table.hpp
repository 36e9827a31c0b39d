#pragma once

#include "raptor/error.hpp"
#include "raptor/ip.hpp"

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <utility>

namespace raptor {

/// Binary trie keyed by IPv4 prefix with longest-prefix-match lookup.
///
/// Tables follow a build-then-freeze lifecycle: after `freeze()` every
/// mutating call throws, and the const interface is safe for concurrent
/// readers. The payload type is opaque to the table.
template <typename T>
class PrefixTable {
 public:
  PrefixTable() = default;
  PrefixTable(const PrefixTable& other) { *this = other; }
  PrefixTable& operator=(const PrefixTable& other) {
    if (this != &other) {
      root_ = other.root_ ? clone(*other.root_) : nullptr;
      size_ = other.size_;
      frozen_ = other.frozen_;
    }
    return *this;
  }
  PrefixTable(PrefixTable&&) noexcept = default;
  PrefixTable& operator=(PrefixTable&&) noexcept = default;

  /// Inserts or replaces the payload stored at `prefix`.
  void insert(const IpPrefix& prefix, T payload) {
    check_mutable();
    Node* node = descend_or_create(prefix);
    if (!node->value) ++size_;
    node->value = std::move(payload);
  }

  /// Removes the entry at exactly `prefix`. Returns false if absent.
  bool erase(const IpPrefix& prefix) {
    check_mutable();
    if (!root_) return false;
    const bool removed = erase_at(root_, prefix, 0);
    if (removed) --size_;
    return removed;
  }

  [[nodiscard]] const T* find(const IpPrefix& prefix) const {
    const Node* node = root_.get();
    for (int depth = 0; node && depth < prefix.length(); ++depth) {
      node = node->child[bit(prefix.base().value(), depth)].get();
    }
    return node && node->value ? &*node->value : nullptr;
  }

  [[nodiscard]] T* find(const IpPrefix& prefix) {
    check_mutable();
    return const_cast<T*>(std::as_const(*this).find(prefix));
  }

  /// Most-specific covering entry, or nullptr when nothing covers `addr`.
  [[nodiscard]] const T* lookup(Ipv4Address addr) const {
    auto hit = lookup_entry(addr);
    return hit ? hit->second : nullptr;
  }

  /// Most-specific covering entry together with its prefix.
  [[nodiscard]] std::optional<std::pair<IpPrefix, const T*>> lookup_entry(
      Ipv4Address addr) const {
    std::optional<std::pair<IpPrefix, const T*>> best;
    const Node* node = root_.get();
    for (int depth = 0; node; ++depth) {
      if (node->value) best.emplace(IpPrefix(addr, depth), &*node->value);
      if (depth == 32) break;
      node = node->child[bit(addr.value(), depth)].get();
    }
    return best;
  }

  /// Calls `fn(prefix, payload)` for every entry covering `addr`, shortest
  /// prefix first.
  template <typename Fn>
  void for_each_covering(Ipv4Address addr, Fn&& fn) const {
    const Node* node = root_.get();
    for (int depth = 0; node; ++depth) {
      if (node->value) fn(IpPrefix(addr, depth), *node->value);
      if (depth == 32) break;
      node = node->child[bit(addr.value(), depth)].get();
    }
  }

  /// Calls `fn(prefix, payload)` for every entry inside `scope` (including
  /// `scope` itself), in address order.
  template <typename Fn>
  void for_each_within(const IpPrefix& scope, Fn&& fn) const {
    const Node* node = root_.get();
    for (int depth = 0; node && depth < scope.length(); ++depth) {
      node = node->child[bit(scope.base().value(), depth)].get();
    }
    if (node) walk(*node, scope.base().value(), scope.length(), fn);
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    if (root_) walk(*root_, 0u, 0, fn);
  }

  /// True iff some entry lies inside `scope`.
  [[nodiscard]] bool any_within(const IpPrefix& scope) const {
    const Node* node = root_.get();
    for (int depth = 0; node && depth < scope.length(); ++depth) {
      node = node->child[bit(scope.base().value(), depth)].get();
    }
    // Empty nodes are pruned on erase, so any surviving node holds an entry
    // somewhere below it.
    return node != nullptr;
  }

  [[nodiscard]] std::size_t size() const { return size_; }
  [[nodiscard]] bool empty() const { return size_ == 0; }

  void freeze() { frozen_ = true; }
  [[nodiscard]] bool frozen() const { return frozen_; }

 private:
  struct Node {
    std::optional<T> value;
    std::array<std::unique_ptr<Node>, 2> child;
  };

  static int bit(std::uint32_t value, int depth) {
    return static_cast<int>((value >> (31 - depth)) & 1u);
  }

  static std::unique_ptr<Node> clone(const Node& node) {
    auto copy = std::make_unique<Node>();
    copy->value = node.value;
    for (int i = 0; i < 2; ++i) {
      if (node.child[i]) copy->child[i] = clone(*node.child[i]);
    }
    return copy;
  }

  void check_mutable() const {
    if (frozen_) {
      throw Error(ErrorCode::kInvalidArgument, "prefix table is frozen");
    }
  }

  Node* descend_or_create(const IpPrefix& prefix) {
    if (!root_) root_ = std::make_unique<Node>();
    Node* node = root_.get();
    for (int depth = 0; depth < prefix.length(); ++depth) {
      auto& next = node->child[bit(prefix.base().value(), depth)];
      if (!next) next = std::make_unique<Node>();
      node = next.get();
    }
    return node;
  }

  // Returns true if the entry was removed; prunes nodes left empty.
  bool erase_at(std::unique_ptr<Node>& node, const IpPrefix& prefix, int depth) {
    bool removed = false;
    if (depth == prefix.length()) {
      removed = node->value.has_value();
      node->value.reset();
    } else {
      auto& next = node->child[bit(prefix.base().value(), depth)];
      if (next) removed = erase_at(next, prefix, depth + 1);
    }
    if (!node->value && !node->child[0] && !node->child[1]) node.reset();
    return removed;
  }

  template <typename Fn>
  static void walk(const Node& node, std::uint32_t base, int depth, Fn& fn) {
    if (node.value) fn(IpPrefix(Ipv4Address(base), depth), *node.value);
    if (depth == 32) return;
    if (node.child[0]) walk(*node.child[0], base, depth + 1, fn);
    if (node.child[1]) {
      walk(*node.child[1], base | (std::uint32_t{1} << (31 - depth)), depth + 1, fn);
    }
  }

  std::unique_ptr<Node> root_;
  std::size_t size_ = 0;
  bool frozen_ = false;
};

}  // namespace raptor
