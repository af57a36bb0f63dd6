#include "tcm/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace tcm {

std::vector<Generation> generate_corpus(const Model& model, std::span<const Instance> corpus, const BeamOptions& options,
                                        bool keep_attention) {
    std::vector<Generation> out;
    out.reserve(corpus.size());
    for (const Instance& inst : corpus) {
        GenerationResult r = beam_search(model, inst.x, inst.y_prime, options, keep_attention);
        out.push_back({inst.id, std::move(r.tokens), r.score, std::move(r.attention_json)});
    }
    return out;
}

void write_generations(std::ostream& out, std::span<const Generation> gens) {
    for (const Generation& g : gens) {
        nlohmann::ordered_json j;
        j["id"] = g.id;
        j["text"] = join_tokens(g.tokens);
        j["tokens"] = g.tokens;
        j["score"] = g.score;
        if (g.attention_json) j["attention"] = nlohmann::json::parse(*g.attention_json);
        out << j.dump() << '\n';
    }
}

void write_generations_file(const std::string& path, std::span<const Generation> gens) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_generations(out, gens);
}

std::vector<Generation> read_generations(std::istream& in) {
    std::vector<Generation> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            Generation g;
            g.id = j.at("id").get<std::string>();
            g.tokens = j.contains("tokens") ? j.at("tokens").get<Tokens>() : tokenize(j.at("text").get<std::string>());
            g.score = j.value("score", 0.0);
            out.push_back(std::move(g));
        } catch (const nlohmann::json::exception& e) {
            throw std::runtime_error("generations line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<Generation> read_generations_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return read_generations(in);
}

std::vector<Tokens> align_generations(std::span<const Generation> gens, std::span<const Instance> corpus) {
    std::map<std::string, const Generation*> by_id;
    for (const Generation& g : gens) by_id[g.id] = &g;
    std::vector<Tokens> out;
    out.reserve(corpus.size());
    for (const Instance& inst : corpus) {
        auto it = by_id.find(inst.id);
        if (it == by_id.end()) throw std::runtime_error("no generation for instance '" + inst.id + "'");
        out.push_back(it->second->tokens);
    }
    return out;
}

std::pair<std::vector<Instance>, std::vector<Instance>> split_corpus(std::span<const Instance> corpus,
                                                                     std::size_t held_out) {
    if (held_out >= corpus.size()) throw std::invalid_argument("split_corpus: held-out part leaves no training data");
    const std::size_t cut = corpus.size() - held_out;
    return {std::vector<Instance>(corpus.begin(), corpus.begin() + static_cast<std::ptrdiff_t>(cut)),
            std::vector<Instance>(corpus.begin() + static_cast<std::ptrdiff_t>(cut), corpus.end())};
}

GradCheckResult grad_check_joint(Model& model, const Instance& inst, const StageWeights& weights,
                                 const GradCheckOptions& options) {
    const Tokens z = greedy_decode(model, inst.x, inst.y_prime, 1, std::max<std::size_t>(1, inst.y_prime.size()));
    auto loss = [&](Tape& tape) {
        const ForwardContext ctx = ForwardContext::eval();
        Var rec = nll_loss(tape, model, inst.x, inst.y_prime, inst.y_aux, ctx);
        Var sty = nll_loss(tape, model, inst.x_prime, inst.y_prime, inst.y_prime, ctx);
        std::optional<Var> bt = back_translation_loss_given(tape, model, inst.x_prime, z, inst.y_prime, ctx);
        return joint_objective(rec, sty, bt, weights);
    };
    return grad_check(loss, model.params(), options);
}

Instance gradcheck_instance() {
    auto table = [](const char* name, const char* pts) {
        std::vector<Record> recs = {{name, "PLAYER_NAME", entity_key(name), Feature::kHome, 0, 0},
                                    {name, "PTS", pts, Feature::kHome, 0, 1}};
        return Table::from_records(std::move(recs));
    };
    Instance inst;
    inst.id = "gradcheck";
    inst.x = table("Kevin Durant", "30");
    inst.x_prime = table("Tim Duncan", "12");
    inst.y_aux = {"durant", "30", "points"};
    inst.y_prime = {"duncan", "12", "points"};
    return inst;
}

}  // namespace tcm
