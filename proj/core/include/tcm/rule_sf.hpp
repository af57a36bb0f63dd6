#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tcm/data.hpp"
#include "tcm/ie.hpp"

namespace tcm {

// A token of y' tied to the x' record or entity it mentions.
struct Slot {
    enum class Kind { kEntity, kValue };
    Kind kind = Kind::kValue;
    std::size_t position = 0;
    std::size_t row = 0;                 // row of x'
    std::optional<std::string> type;     // value slots only
};

struct SlottedTemplate {
    Tokens tokens;  // y' unchanged; slots index into it
    std::vector<Slot> slots;
};

SlottedTemplate make_template(std::span<const std::string> y_prime, const Table& x_prime,
                              const ExtractorOptions& options = {});

// Row of x for each row of x': k-th home row to k-th home row, k-th visiting
// row to k-th visiting row; rows left over fall back to global row order.
std::vector<std::optional<std::size_t>> align_rows(const Table& x_prime, const Table& x);

// Fills every slot of y' from x. Unmappable slots keep their token and are
// reported through `log` when given. Output length equals |y'|.
Tokens rule_sf(const Table& x, std::span<const std::string> y_prime, const Table& x_prime,
               const std::function<void(const std::string&)>& log = {}, const ExtractorOptions& options = {});

}  // namespace tcm
