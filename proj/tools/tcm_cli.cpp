#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tcm/data.hpp"
#include "tcm/ie.hpp"
#include "tcm/metrics.hpp"
#include "tcm/model.hpp"
#include "tcm/pipeline.hpp"
#include "tcm/rule_sf.hpp"
#include "tcm/training.hpp"

namespace fs = std::filesystem;

namespace {

void log_line(const std::string& msg) { std::cerr << msg << '\n'; }

fs::path ensure_dir(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

struct Common {
    std::string out = ".";
    std::uint64_t seed = 1;
    bool seed_given = false;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Table-to-text generation with a retrieved style reference"};
    app.require_subcommand(1);
    Common common;

    // synth-data
    auto* synth = app.add_subcommand("synth-data", "Write a seeded synthetic corpus as JSONL");
    tcm::SynthOptions synth_opts;
    synth->add_option("--seed", synth_opts.seed, "Generator seed");
    synth->add_option("-n,--instances", synth_opts.n_instances, "Number of instances");
    synth->add_option("--rows", synth_opts.n_rows, "Rows per table");
    synth->add_option("--types", synth_opts.n_types, "Columns per table, the name column included");
    synth->add_option("--out", common.out, "Output directory");

    // stats
    auto* stats = app.add_subcommand("stats", "Corpus statistics as JSON");
    std::string corpus_path;
    stats->add_option("corpus", corpus_path, "Corpus JSONL")->required();

    // build-dataset
    auto* build = app.add_subcommand("build-dataset", "Retrieve y' and x' for every instance");
    build->add_option("corpus", corpus_path, "Corpus JSONL")->required();
    build->add_option("--out", common.out, "Output directory");

    // shared training / decoding options
    std::string config_path;
    std::vector<std::string> overrides;
    tcm::TrainConfig cfg;
    std::string data_path, checkpoint, gens_path;
    bool no_inter_att = false, no_back_trans = false, mask_records = false, keep_attention = false;
    std::size_t beam = 0, min_len = 0, max_len = 0;
    bool beam_given = false;

    auto* train = app.add_subcommand("train", "Three-stage training");
    train->add_option("dataset", data_path, "Dataset JSONL from build-dataset")->required();
    train->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    train->add_option("--set", overrides, "Config override key=value (repeatable)");
    train->add_option("--seed", common.seed, "Seed for initialisation, shuffling and dropout");
    train->add_option("--out", common.out, "Output directory");
    train->add_flag("--no-inter-att", no_inter_att, "Attend over records and reference separately");
    train->add_flag("--no-back-trans", no_back_trans, "Drop the back-translation term");

    auto* generate = app.add_subcommand("generate", "Beam-search summaries for a dataset");
    generate->add_option("checkpoint", checkpoint, "Model checkpoint")->required()->check(CLI::ExistingFile);
    generate->add_option("dataset", data_path, "Dataset JSONL")->required();
    generate->add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    generate->add_option("--beam", beam, "Beam width");
    generate->add_option("--min-len", min_len, "Minimum output length");
    generate->add_option("--max-len", max_len, "Maximum output length");
    generate->add_flag("--attention", keep_attention, "Include interactive-attention matrices");
    generate->add_option("--out", common.out, "Output directory");

    auto* evaluate = app.add_subcommand("evaluate", "Style BLEU, content fidelity and content selection");
    evaluate->add_option("dataset", data_path, "Dataset JSONL")->required();
    evaluate->add_option("generations", gens_path, "generations.jsonl")->required()->check(CLI::ExistingFile);
    evaluate->add_flag("--mask-records", mask_records, "Mask record tokens before BLEU");
    evaluate->add_option("--out", common.out, "Output directory");

    auto* baseline = app.add_subcommand("baseline", "Non-neural baselines");
    baseline->require_subcommand(1);
    auto* rule_sf = baseline->add_subcommand("rule-sf", "Rule-based slot filling of y' from x");
    rule_sf->add_option("dataset", data_path, "Dataset JSONL")->required();
    rule_sf->add_option("--out", common.out, "Output directory");

    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference check of the joint loss");
    gradcheck->add_option("--seed", common.seed, "Initialisation seed");
    gradcheck->add_option("--out", common.out, "Output directory");
    gradcheck->add_flag("--no-inter-att", no_inter_att, "Check the ablated architecture");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << '\n' << app.help();
        return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
    }

    auto load_config = [&] {
        tcm::TrainConfig c;
        if (!config_path.empty()) c = tcm::load_train_config(config_path);
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw tcm::ConfigError("--set expects key=value, got '" + kv + "'");
            tcm::set_config_value(c, kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (no_inter_att) c.no_inter_att = true;
        if (no_back_trans) c.no_back_trans = true;
        c.validate();
        return c;
    };

    try {
        if (*synth) {
            const auto corpus = tcm::synth_corpus(synth_opts);
            const fs::path out = ensure_dir(common.out) / "corpus.jsonl";
            tcm::write_corpus_file(out.string(), corpus);
            log_line("wrote " + std::to_string(corpus.size()) + " instances to " + out.string());
        } else if (*stats) {
            const auto corpus = tcm::parse_corpus_file(corpus_path);
            const auto s = tcm::corpus_stats(corpus);
            nlohmann::ordered_json j;
            j["instances"] = s.instances;
            j["avg_ref_length"] = s.avg_ref_length;
            j["data_types"] = s.data_types;
            j["avg_input_records"] = s.avg_input_records;
            j["avg_output_records"] = s.avg_output_records;
            std::cout << j.dump(2) << '\n';
        } else if (*build) {
            const auto corpus = tcm::parse_corpus_file(corpus_path);
            const auto dataset = tcm::build_dataset(corpus);
            const fs::path out = ensure_dir(common.out) / "dataset.jsonl";
            tcm::write_corpus_file(out.string(), dataset);
            log_line("wrote " + std::to_string(dataset.size()) + " instances to " + out.string());
        } else if (*train) {
            cfg = load_config();
            if (train->count("--seed")) cfg.seed = common.seed;
            const auto data = tcm::parse_corpus_file(data_path);
            const fs::path out = ensure_dir(common.out);
            tcm::Model model(cfg.model_config(), tcm::build_vocab(data, cfg.min_freq), cfg.seed);
            write_text(out / "config.txt", tcm::format_train_config(cfg));
            std::ofstream csv(out / "train_log.csv");
            csv << tcm::train_log_csv_header() << '\n';
            tcm::TrainHooks hooks;
            hooks.log = log_line;
            hooks.on_step = [&](const tcm::TrainLogRow& row) { csv << tcm::train_log_csv_row(row) << '\n'; };
            hooks.on_epoch_end = [&](const tcm::Model& m, std::size_t epoch, std::size_t stage) {
                log_line("epoch " + std::to_string(epoch) + " (stage " + std::to_string(stage) + ") done");
                if (stage == 1 && epoch == cfg.stage_epochs[0])
                    tcm::save_checkpoint_file((out / "model.stage1.ckpt").string(), m);
            };
            const auto result = tcm::train(model, data, cfg, hooks);
            tcm::save_checkpoint_file((out / "model.ckpt").string(), model);
            log_line("trained " + std::to_string(result.epochs_run) + " epochs, " + std::to_string(result.log.size()) +
                     " steps; checkpoint " + (out / "model.ckpt").string());
        } else if (*generate) {
            cfg = load_config();
            tcm::BeamOptions opts{cfg.beam, cfg.min_len, cfg.max_len};
            if (generate->count("--beam")) opts.beam = beam;
            if (generate->count("--min-len")) opts.min_len = min_len;
            if (generate->count("--max-len")) opts.max_len = max_len;
            if (opts.beam == 0 || opts.min_len > opts.max_len)
                throw tcm::ConfigError("need --beam >= 1 and --min-len <= --max-len");
            const auto model = tcm::load_checkpoint_file(checkpoint);
            const auto data = tcm::parse_corpus_file(data_path);
            const auto gens = tcm::generate_corpus(*model, data, opts, keep_attention);
            const fs::path out = ensure_dir(common.out) / "generations.jsonl";
            tcm::write_generations_file(out.string(), gens);
            log_line("wrote " + std::to_string(gens.size()) + " generations to " + out.string());
        } else if (*evaluate) {
            const auto data = tcm::parse_corpus_file(data_path);
            const auto gens = tcm::read_generations_file(gens_path);
            tcm::EvalOptions opts;
            opts.mask_records = mask_records;
            const auto report = tcm::evaluate(tcm::align_generations(gens, data), data, opts);
            write_text(ensure_dir(common.out) / "metrics.json", report.to_json() + "\n");
            std::cout << report.to_table();
        } else if (*rule_sf) {
            const auto data = tcm::parse_corpus_file(data_path);
            std::vector<tcm::Generation> gens;
            for (const auto& inst : data)
                gens.push_back({inst.id, tcm::rule_sf(inst.x, inst.y_prime, inst.x_prime, log_line), 0.0, {}});
            const fs::path out = ensure_dir(common.out) / "generations.jsonl";
            tcm::write_generations_file(out.string(), gens);
            log_line("wrote " + std::to_string(gens.size()) + " generations to " + out.string());
        } else if (*gradcheck) {
            const tcm::Instance inst = tcm::gradcheck_instance();
            const tcm::Instance pool[] = {inst};
            tcm::ModelConfig mc;
            mc.d = 4;
            mc.dropout = 0.0;
            mc.interactive_attention = !no_inter_att;
            tcm::Model model(mc, tcm::build_vocab(pool, 1), common.seed);
            const auto r = tcm::grad_check_joint(model, inst, tcm::StageWeights{0.4, 0.5});
            nlohmann::ordered_json j;
            j["max_relative_error"] = r.max_relative_error;
            j["worst_parameter"] = r.worst_parameter;
            j["coords_checked"] = r.coords_checked;
            j["passed"] = r.max_relative_error < 1e-3;
            write_text(ensure_dir(common.out) / "gradcheck.json", j.dump(2) + "\n");
            std::cout << j.dump(2) << '\n';
            return r.max_relative_error < 1e-3 ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
