#include "seampack/binpack.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <string>
#include <utility>

namespace seampack {

namespace {

void check_sizes(std::span<const Item> items, std::size_t capacity) {
    for (const auto& it : items) {
        if (it.size == 0) {
            throw ItemTooLarge("item " + std::to_string(it.id) + " has size 0");
        }
        if (it.size > capacity) {
            throw ItemTooLarge("item " + std::to_string(it.id) + " of size " + std::to_string(it.size) +
                               " exceeds bin capacity " + std::to_string(capacity));
        }
    }
}

}  // namespace

std::vector<Item> sort_decreasing(std::vector<Item> items) {
    std::stable_sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.size > b.size; });
    return items;
}

FitIndex::FitIndex(std::size_t slots, std::size_t initial_remaining) : slots_(slots) {
    while (leaves_ < std::max<std::size_t>(slots, 1)) leaves_ *= 2;
    tree_.assign(2 * leaves_, 0);
    for (std::size_t i = 0; i < slots; ++i) tree_[leaves_ + i] = initial_remaining;
    for (std::size_t i = leaves_ - 1; i >= 1; --i) tree_[i] = std::max(tree_[2 * i], tree_[2 * i + 1]);
}

FitIndex::FitIndex(std::span<const std::size_t> remaining) : FitIndex(remaining.size(), 0) {
    for (std::size_t i = 0; i < remaining.size(); ++i) tree_[leaves_ + i] = remaining[i];
    for (std::size_t i = leaves_ - 1; i >= 1; --i) tree_[i] = std::max(tree_[2 * i], tree_[2 * i + 1]);
}

void FitIndex::set(std::size_t slot, std::size_t remaining) {
    std::size_t i = leaves_ + slot;
    tree_[i] = remaining;
    for (i /= 2; i >= 1; i /= 2) tree_[i] = std::max(tree_[2 * i], tree_[2 * i + 1]);
}

std::optional<std::size_t> FitIndex::find_first_fit(std::size_t size) const {
    if (slots_ == 0 || tree_[1] < size) return std::nullopt;
    std::size_t i = 1;
    while (i < leaves_) {
        i = tree_[2 * i] >= size ? 2 * i : 2 * i + 1;
    }
    return i - leaves_;
}

std::vector<Bin> ffd_pack(std::vector<Item> items, std::size_t capacity) {
    check_sizes(items, capacity);
    items = sort_decreasing(std::move(items));
    std::vector<Bin> bins;
    // One slot per item is enough: untouched slots carry full capacity, so
    // the first fit among them is always the next bin to open.
    FitIndex index(items.size(), capacity);
    for (auto& item : items) {
        const std::size_t slot = *index.find_first_fit(item.size);
        if (slot == bins.size()) bins.push_back(Bin{capacity, {}, 0});
        Bin& b = bins[slot];
        b.fill += item.size;
        b.items.push_back(std::move(item));
        index.set(slot, b.remaining());
    }
    return bins;
}

std::vector<Bin> bfd_pack(std::vector<Item> items, std::size_t capacity) {
    check_sizes(items, capacity);
    items = sort_decreasing(std::move(items));
    std::vector<Bin> bins;
    std::set<std::pair<std::size_t, std::size_t>> by_room;  // (remaining, bin index)
    for (auto& item : items) {
        std::size_t slot = 0;
        auto it = by_room.lower_bound({item.size, 0});
        if (it == by_room.end()) {
            slot = bins.size();
            bins.push_back(Bin{capacity, {}, 0});
        } else {
            slot = it->second;
            by_room.erase(it);
        }
        Bin& b = bins[slot];
        b.fill += item.size;
        b.items.push_back(std::move(item));
        if (b.remaining() > 0) by_room.insert({b.remaining(), slot});
    }
    return bins;
}

std::size_t optimal_bins(std::span<const Item> items, std::size_t capacity) {
    if (items.size() > kOptimalBinsMaxItems) {
        throw std::invalid_argument("optimal_bins supports at most " + std::to_string(kOptimalBinsMaxItems) +
                                    " items (got " + std::to_string(items.size()) + ")");
    }
    check_sizes(items, capacity);
    if (items.empty()) return 0;

    std::vector<std::size_t> sizes;
    for (const auto& it : items) sizes.push_back(it.size);
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
    const std::size_t lower = (total + capacity - 1) / capacity;

    std::size_t best = sizes.size();
    std::vector<std::size_t> loads;
    std::function<void(std::size_t)> search = [&](std::size_t i) {
        if (best == lower) return;
        if (i == sizes.size()) {
            best = std::min(best, loads.size());
            return;
        }
        for (std::size_t b = 0; b < loads.size(); ++b) {
            if (loads[b] + sizes[i] > capacity) continue;
            // Bins with identical loads are interchangeable.
            bool repeat = false;
            for (std::size_t p = 0; p < b; ++p) repeat = repeat || loads[p] == loads[b];
            if (repeat) continue;
            loads[b] += sizes[i];
            search(i + 1);
            loads[b] -= sizes[i];
        }
        if (loads.size() + 1 < best) {
            loads.push_back(sizes[i]);
            search(i + 1);
            loads.pop_back();
        }
    };
    search(0);
    return best;
}

}  // namespace seampack
