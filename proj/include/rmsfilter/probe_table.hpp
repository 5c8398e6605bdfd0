#pragma once

// Open-addressing table with a hard probe limit and a small overflow stash.
// Entries are addressed by (home, tag): the caller supplies the home slot and
// the residual key bits that, together with the home, identify the key. Each
// slot records its displacement from home, so the stored tag may be quotiented.
//
// Deleted slots become tombstones and are never turned back into empty slots,
// which keeps "stop at the first empty slot" valid for lookups.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rmsf::detail {

template <class Value>
class BoundedProbeTable {
 public:
  static constexpr unsigned kDefaultProbeLimit = 32;
  static constexpr std::size_t kDefaultStashCapacity = 64;

  BoundedProbeTable() = default;
  explicit BoundedProbeTable(std::size_t slots, unsigned probe_limit = kDefaultProbeLimit,
                             std::size_t stash_capacity = kDefaultStashCapacity)
      : slots_(slots), probe_limit_(probe_limit), stash_capacity_(stash_capacity) {
    if (slots == 0) throw std::invalid_argument("probe table needs at least one slot");
    stash_.reserve(stash_capacity);
  }

  [[nodiscard]] auto find(std::uint64_t home, std::uint64_t tag) -> Value* {
    return const_cast<Value*>(std::as_const(*this).find(home, tag));
  }

  [[nodiscard]] auto find(std::uint64_t home, std::uint64_t tag) const -> const Value* {
    const unsigned window = window_size();
    for (unsigned i = 0; i < window; ++i) {
      const Slot& s = slots_[(home + i) % slots_.size()];
      if (s.state == State::empty) break;
      if (s.state == State::occupied && s.displacement == i && s.tag == tag) return &s.value;
    }
    for (const auto& e : stash_) {
      if (e.home == home && e.tag == tag) return &e.value;
    }
    return nullptr;
  }

  // Precondition: (home, tag) is absent. Returns nullptr when both the probe
  // window and the stash are exhausted.
  auto emplace(std::uint64_t home, std::uint64_t tag, Value value) -> Value* {
    const unsigned window = window_size();
    for (unsigned i = 0; i < window; ++i) {
      Slot& s = slots_[(home + i) % slots_.size()];
      if (s.state != State::occupied) {
        s = Slot{tag, value, State::occupied, static_cast<std::uint8_t>(i)};
        ++size_;
        return &s.value;
      }
    }
    if (stash_.size() == stash_capacity_) return nullptr;
    stash_.push_back(StashEntry{home, tag, value});
    ++size_;
    return &stash_.back().value;
  }

  auto erase(std::uint64_t home, std::uint64_t tag) -> bool {
    const unsigned window = window_size();
    for (unsigned i = 0; i < window; ++i) {
      Slot& s = slots_[(home + i) % slots_.size()];
      if (s.state == State::empty) break;
      if (s.state == State::occupied && s.displacement == i && s.tag == tag) {
        s.state = State::tombstone;
        --size_;
        return true;
      }
    }
    for (auto it = stash_.begin(); it != stash_.end(); ++it) {
      if (it->home == home && it->tag == tag) {
        *it = stash_.back();
        stash_.pop_back();
        --size_;
        return true;
      }
    }
    return false;
  }

  template <class F>
  void for_each(F&& f) const {
    for (const auto& s : slots_) {
      if (s.state == State::occupied) f(s.value);
    }
    for (const auto& e : stash_) f(e.value);
  }

  [[nodiscard]] auto size() const noexcept -> std::size_t { return size_; }
  [[nodiscard]] auto slot_count() const noexcept -> std::size_t { return slots_.size(); }
  [[nodiscard]] auto stash_used() const noexcept -> std::size_t { return stash_.size(); }
  [[nodiscard]] auto stash_capacity() const noexcept -> std::size_t { return stash_capacity_; }
  [[nodiscard]] auto probe_limit() const noexcept -> unsigned { return probe_limit_; }

 private:
  enum class State : std::uint8_t { empty, occupied, tombstone };

  struct Slot {
    std::uint64_t tag = 0;
    Value value{};
    State state = State::empty;
    std::uint8_t displacement = 0;
  };

  struct StashEntry {
    std::uint64_t home;
    std::uint64_t tag;
    Value value;
  };

  [[nodiscard]] auto window_size() const noexcept -> unsigned {
    return slots_.size() < probe_limit_ ? static_cast<unsigned>(slots_.size()) : probe_limit_;
  }

  std::vector<Slot> slots_;
  std::vector<StashEntry> stash_;
  unsigned probe_limit_ = kDefaultProbeLimit;
  std::size_t stash_capacity_ = kDefaultStashCapacity;
  std::size_t size_ = 0;
};

}  // namespace rmsf::detail
