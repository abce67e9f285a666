#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <unordered_map>

namespace lmn {

/// Interned atom or membrane name. Symbol 0 is the empty name (anonymous membrane).
using Symbol = std::uint32_t;

/// Link identity. Ids below kFreshBase are interned user-visible names;
/// ids at or above it are anonymous links minted by desugaring or rewriting.
using LinkId = std::uint32_t;

inline constexpr LinkId kNoLink = 0xffffffffu;
inline constexpr LinkId kFreshBase = 0x80000000u;

namespace detail {

class Interner {
 public:
  explicit Interner(bool reserve_empty = false) {
    if (reserve_empty) intern("");
  }

  std::uint32_t intern(std::string_view text) {
    {
      std::shared_lock lock(mu_);
      if (auto it = index_.find(std::string(text)); it != index_.end()) return it->second;
    }
    std::unique_lock lock(mu_);
    if (auto it = index_.find(std::string(text)); it != index_.end()) return it->second;
    auto id = static_cast<std::uint32_t>(names_.size());
    names_.emplace_back(text);
    index_.emplace(names_.back(), id);
    return id;
  }

  // deque keeps references stable while other threads intern.
  const std::string& text(std::uint32_t id) const {
    std::shared_lock lock(mu_);
    return names_[id];
  }

 private:
  mutable std::shared_mutex mu_;
  std::deque<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

inline Interner& symbol_table() {
  static Interner table(true);
  return table;
}

inline Interner& link_table() {
  static Interner table;
  return table;
}

inline std::atomic<LinkId>& fresh_counter() {
  static std::atomic<LinkId> counter{kFreshBase};
  return counter;
}

}  // namespace detail

inline Symbol intern(std::string_view name) { return detail::symbol_table().intern(name); }
inline const std::string& symbol_text(Symbol s) { return detail::symbol_table().text(s); }

inline LinkId named_link(std::string_view name) { return detail::link_table().intern(name); }
inline LinkId fresh_link() { return detail::fresh_counter().fetch_add(1, std::memory_order_relaxed); }
inline bool is_fresh(LinkId l) { return l >= kFreshBase && l != kNoLink; }

inline std::string link_text(LinkId l) {
  if (is_fresh(l)) return "_L" + std::to_string(l - kFreshBase);
  return detail::link_table().text(l);
}

/// Names of the distinguished atoms.
namespace sym {
inline Symbol connector() { static const Symbol s = intern("="); return s; }
inline Symbol plus() { static const Symbol s = intern("+"); return s; }
inline Symbol minus() { static const Symbol s = intern("-"); return s; }
inline Symbol mell_copy() { static const Symbol s = intern("mell.copy"); return s; }
inline Symbol mell_delete() { static const Symbol s = intern("mell.delete"); return s; }
inline Symbol nlmem_copy() { static const Symbol s = intern("nlmem.copy"); return s; }
inline Symbol nlmem_kill() { static const Symbol s = intern("nlmem.kill"); return s; }
}  // namespace sym

}  // namespace lmn
