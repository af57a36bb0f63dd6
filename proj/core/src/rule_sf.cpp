#include "tcm/rule_sf.hpp"

#include <algorithm>
#include <set>

namespace tcm {

namespace {

Feature row_feature(const Table& t, std::size_t row) { return t.at(row, 0).feature; }

// Row whose name contains `tok`, when exactly one does.
std::optional<std::size_t> unique_row_of(const Table& t, const std::string& tok) {
    std::optional<std::size_t> hit;
    for (std::size_t i = 0; i < t.rows(); ++i) {
        const Tokens name = entity_tokens(t.entities()[i]);
        if (std::find(name.begin(), name.end(), tok) == name.end()) continue;
        if (hit) return std::nullopt;
        hit = i;
    }
    return hit;
}

}  // namespace

SlottedTemplate make_template(std::span<const std::string> y_prime, const Table& x_prime,
                              const ExtractorOptions& options) {
    SlottedTemplate tpl;
    tpl.tokens.assign(y_prime.begin(), y_prime.end());
    for (std::size_t p : entity_mention_positions(y_prime, x_prime)) {
        Slot s;
        s.kind = Slot::Kind::kEntity;
        s.position = p;
        s.row = *unique_row_of(x_prime, y_prime[p]);
        tpl.slots.push_back(s);
    }
    for (const Mention& m : extract_mentions(y_prime, x_prime, options)) {
        Slot s;
        s.kind = Slot::Kind::kValue;
        s.position = m.value_pos;
        s.row = *x_prime.find_entity(m.record.entity);
        s.type = m.record.type;
        tpl.slots.push_back(s);
    }
    std::sort(tpl.slots.begin(), tpl.slots.end(), [](const Slot& a, const Slot& b) { return a.position < b.position; });
    return tpl;
}

std::vector<std::optional<std::size_t>> align_rows(const Table& x_prime, const Table& x) {
    std::vector<std::optional<std::size_t>> map(x_prime.rows());
    std::set<std::size_t> used;
    for (Feature f : {Feature::kHome, Feature::kVisiting}) {
        std::vector<std::size_t> src, dst;
        for (std::size_t i = 0; i < x_prime.rows(); ++i)
            if (row_feature(x_prime, i) == f) src.push_back(i);
        for (std::size_t i = 0; i < x.rows(); ++i)
            if (row_feature(x, i) == f) dst.push_back(i);
        for (std::size_t k = 0; k < std::min(src.size(), dst.size()); ++k) {
            map[src[k]] = dst[k];
            used.insert(dst[k]);
        }
    }
    std::size_t next = 0;
    for (auto& m : map) {
        if (m) continue;
        while (next < x.rows() && used.count(next)) ++next;
        if (next == x.rows()) break;
        m = next;
        used.insert(next);
    }
    return map;
}

Tokens rule_sf(const Table& x, std::span<const std::string> y_prime, const Table& x_prime,
               const std::function<void(const std::string&)>& log, const ExtractorOptions& options) {
    SlottedTemplate tpl = make_template(y_prime, x_prime, options);
    Tokens out = tpl.tokens;
    if (x.empty() || x_prime.empty()) return out;
    const auto rows = align_rows(x_prime, x);
    auto report = [&](const Slot& s, const std::string& why) {
        if (log) log("rule-sf: kept '" + tpl.tokens[s.position] + "' at " + std::to_string(s.position) + ": " + why);
    };
    for (const Slot& s : tpl.slots) {
        const auto& row = rows[s.row];
        if (!row) {
            report(s, "no aligned entity in x");
            continue;
        }
        if (s.kind == Slot::Kind::kEntity) {
            const Tokens src = entity_tokens(x_prime.entities()[s.row]);
            const Tokens dst = entity_tokens(x.entities()[*row]);
            const auto k = static_cast<std::size_t>(std::find(src.begin(), src.end(), out[s.position]) - src.begin());
            // surname to surname, otherwise the same name part when both names have it
            if (k + 1 == src.size() || k >= dst.size()) out[s.position] = dst.back();
            else out[s.position] = dst[k];
            continue;
        }
        const auto col = x.find_type(*s.type);
        if (!col) {
            report(s, "type " + *s.type + " absent from x");
            continue;
        }
        out[s.position] = x.at(*row, *col).value;
    }
    return out;
}

}  // namespace tcm
