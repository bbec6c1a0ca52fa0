#pragma once

// First-Fit-Decreasing and Best-Fit-Decreasing bin packing over token chunks.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "seampack/window.hpp"

namespace seampack {

struct Item {
    std::size_t id = 0;    // stable original index
    std::size_t size = 0;  // tokens
    Chunk payload{};
};

struct Bin {
    std::size_t capacity = 0;
    std::vector<Item> items;  // insertion order
    std::size_t fill = 0;

    std::size_t remaining() const noexcept { return capacity - fill; }
};

class ItemTooLarge : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Stable sort by size, largest first; equal sizes keep input order.
std::vector<Item> sort_decreasing(std::vector<Item> items);

/// Max segment tree over per-bin remaining capacities. find_first_fit
/// descends to the leftmost slot whose remaining capacity covers `size`.
class FitIndex {
public:
    FitIndex(std::size_t slots, std::size_t initial_remaining);
    explicit FitIndex(std::span<const std::size_t> remaining);

    std::size_t slots() const noexcept { return slots_; }
    std::size_t remaining(std::size_t slot) const { return tree_[leaves_ + slot]; }
    void set(std::size_t slot, std::size_t remaining);
    std::optional<std::size_t> find_first_fit(std::size_t size) const;

private:
    std::size_t slots_ = 0;
    std::size_t leaves_ = 1;
    std::vector<std::size_t> tree_;
};

/// Items go, in sort_decreasing order, into the lowest-index bin with room;
/// a new bin is opened at the end when none has room.
std::vector<Bin> ffd_pack(std::vector<Item> items, std::size_t capacity);

/// Items go, in sort_decreasing order, into the bin left with the least room
/// after placement (lowest index on ties).
std::vector<Bin> bfd_pack(std::vector<Item> items, std::size_t capacity);

inline constexpr std::size_t kOptimalBinsMaxItems = 10;

/// Exact minimum bin count by branch and bound. Test oracle; at most
/// kOptimalBinsMaxItems items.
std::size_t optimal_bins(std::span<const Item> items, std::size_t capacity);

}  // namespace seampack
