#include "tcm/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace tcm {

namespace {

using NGramCounts = std::map<std::vector<std::string>, std::size_t>;

NGramCounts ngrams(std::span<const std::string> toks, std::size_t n) {
    NGramCounts out;
    if (toks.size() < n) return out;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) ++out[std::vector<std::string>(toks.begin() + i, toks.begin() + i + n)];
    return out;
}

}  // namespace

Real bleu(std::span<const Tokens> candidates, std::span<const Tokens> references, std::size_t max_n) {
    if (candidates.empty()) throw std::invalid_argument("bleu: empty candidate list");
    if (candidates.size() != references.size())
        throw std::invalid_argument("bleu: " + std::to_string(candidates.size()) + " candidates but " +
                                    std::to_string(references.size()) + " references");
    if (max_n == 0) throw std::invalid_argument("bleu: max_n must be positive");
    std::vector<std::size_t> matched(max_n, 0), total(max_n, 0);
    std::size_t cand_len = 0, ref_len = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        cand_len += candidates[i].size();
        ref_len += references[i].size();
        for (std::size_t n = 1; n <= max_n; ++n) {
            const NGramCounts c = ngrams(candidates[i], n);
            const NGramCounts r = ngrams(references[i], n);
            for (const auto& [g, k] : c) {
                total[n - 1] += k;
                if (auto it = r.find(g); it != r.end()) matched[n - 1] += std::min(k, it->second);
            }
        }
    }
    if (cand_len == 0) return 0.0;
    Real log_sum = 0.0;
    for (std::size_t n = 0; n < max_n; ++n) {
        if (matched[n] == 0) return 0.0;
        log_sum += std::log(static_cast<Real>(matched[n]) / static_cast<Real>(total[n]));
    }
    const Real bp =
        cand_len >= ref_len ? 1.0 : std::exp(1.0 - static_cast<Real>(ref_len) / static_cast<Real>(cand_len));
    return 100.0 * bp * std::exp(log_sum / static_cast<Real>(max_n));
}

Real sentence_bleu(std::span<const std::string> candidate, std::span<const std::string> reference, std::size_t max_n) {
    const Tokens c[] = {Tokens(candidate.begin(), candidate.end())};
    const Tokens r[] = {Tokens(reference.begin(), reference.end())};
    return bleu(c, r, max_n);
}

FidelityScore content_fidelity(const RecordSet& extracted, const Table& x) {
    FidelityScore s;
    if (extracted.empty()) return s;
    const RecordSet gold = table_records(x);
    for (const auto& r : extracted)
        if (gold.count(r)) ++s.count;
    s.precision = 100.0 * static_cast<Real>(s.count) / static_cast<Real>(extracted.size());
    return s;
}

FidelityScore content_fidelity(std::span<const std::string> z, const Table& x, const ExtractorOptions& options) {
    return content_fidelity(extract_records_from_text(z, x, options), x);
}

SelectionScore content_selection(const RecordSet& generated, const RecordSet& gold) {
    SelectionScore s;
    std::size_t both = 0;
    for (const auto& r : generated)
        if (gold.count(r)) ++both;
    if (!generated.empty()) s.precision = 100.0 * static_cast<Real>(both) / static_cast<Real>(generated.size());
    if (!gold.empty()) s.recall = 100.0 * static_cast<Real>(both) / static_cast<Real>(gold.size());
    if (s.precision + s.recall > 0.0) s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

SelectionScore content_selection(std::span<const std::string> z, std::span<const std::string> y_aux, const Table& x,
                                 const Table& x_gold, const ExtractorOptions& options) {
    return content_selection(extract_records_from_text(z, x, options), extract_records_from_text(y_aux, x_gold, options));
}

MetricReport evaluate(std::span<const Tokens> generations, std::span<const Instance> corpus,
                      const EvalOptions& options) {
    if (generations.size() != corpus.size())
        throw std::invalid_argument("evaluate: " + std::to_string(generations.size()) + " generations for " +
                                    std::to_string(corpus.size()) + " instances");
    if (corpus.empty()) throw std::invalid_argument("evaluate: empty corpus");
    MetricReport rep;
    rep.instances = corpus.size();
    rep.masked = options.mask_records;
    std::vector<Tokens> cands, refs;
    cands.reserve(corpus.size());
    refs.reserve(corpus.size());
    Real cf_p = 0.0, cf_n = 0.0, cs_p = 0.0, cs_r = 0.0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const Instance& inst = corpus[i];
        const Tokens& z = generations[i];
        if (options.mask_records) {
            cands.push_back(mask_record_tokens(z, inst.x, options.extractor));
            refs.push_back(mask_record_tokens(inst.y_prime, inst.x_prime, options.extractor));
        } else {
            cands.push_back(z);
            refs.push_back(inst.y_prime);
        }
        const RecordSet ez = extract_records_from_text(z, inst.x, options.extractor);
        const FidelityScore cf = content_fidelity(ez, inst.x);
        cf_p += cf.precision;
        cf_n += static_cast<Real>(cf.count);
        const SelectionScore cs = content_selection(ez, extract_records_from_text(inst.y_aux, inst.x, options.extractor));
        cs_p += cs.precision;
        cs_r += cs.recall;
    }
    const Real n = static_cast<Real>(corpus.size());
    rep.style_bleu = bleu(cands, refs);
    rep.cf_precision = cf_p / n;
    rep.cf_count = cf_n / n;
    rep.cs_precision = cs_p / n;
    rep.cs_recall = cs_r / n;
    if (rep.cs_precision + rep.cs_recall > 0.0)
        rep.cs_f1 = 2.0 * rep.cs_precision * rep.cs_recall / (rep.cs_precision + rep.cs_recall);
    return rep;
}

std::string MetricReport::to_json() const {
    nlohmann::ordered_json j;
    j["instances"] = instances;
    j["style_bleu"] = style_bleu;
    j["style_bleu_masked"] = masked;
    j["cf_precision"] = cf_precision;
    j["cf_count"] = cf_count;
    j["cs_precision"] = cs_precision;
    j["cs_recall"] = cs_recall;
    j["cs_f1"] = cs_f1;
    return j.dump(2);
}

std::string MetricReport::to_table() const {
    char buf[256];
    std::ostringstream o;
    std::snprintf(buf, sizeof buf, "%10s %8s %8s %8s %8s %12s\n", "CF(P%)", "CF(#)", "CS(P%)", "CS(R%)", "CS(F%)",
                  masked ? "BLEU(masked)" : "Style BLEU");
    o << buf;
    std::snprintf(buf, sizeof buf, "%10.2f %8.2f %8.2f %8.2f %8.2f %12.2f\n", cf_precision, cf_count, cs_precision,
                  cs_recall, cs_f1, style_bleu);
    o << buf;
    return o.str();
}

}  // namespace tcm
