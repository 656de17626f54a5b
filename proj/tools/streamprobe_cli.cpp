// Command-line front end: synthetic dataset generation, probe training,
// evaluation, streaming token scoring, and corpus ciphering.

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "streamprobe/streamprobe.hpp"

using nlohmann::ordered_json;
using namespace streamprobe;

namespace {

constexpr const char* kAppVersion = "0.1.0";

int log_level() {
    const char* env = std::getenv("STREAMPROBE_LOG");
    if (env == nullptr) return 1;
    const std::string v(env);
    if (v == "quiet") return 0;
    if (v == "debug") return 2;
    return 1;
}

void info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << msg << "\n";
}

// One mirrored key per flag; config-file values apply only when the flag was
// not given on the command line.
struct Binding {
    std::string key;
    CLI::Option* opt = nullptr;
    std::function<void(const ordered_json&)> apply;
};

struct Mirror {
    std::vector<Binding> bindings;

    template <typename T>
    void add(CLI::App& cmd, const std::string& flag, T& var, const std::string& desc) {
        Binding b;
        b.key = flag;
        b.opt = cmd.add_option("--" + flag, var, desc);
        b.apply = [&var](const ordered_json& j) { var = j.get<T>(); };
        bindings.push_back(std::move(b));
    }

    void apply_config(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw io_error("cannot open config file '" + path + "'");
        ordered_json doc;
        try {
            in >> doc;
        } catch (const std::exception& e) {
            throw format_error("config file '" + path + "': " + e.what());
        }
        for (auto it = doc.begin(); it != doc.end(); ++it) {
            bool known = false;
            for (auto& b : bindings) {
                if (b.key == it.key()) {
                    known = true;
                    if (b.opt->count() == 0) b.apply(it.value());
                    break;
                }
            }
            if (!known) throw config_error("config file key '" + it.key() + "' is not a flag");
        }
    }
};

std::string file_sink_error(const std::string& path) {
    return "cannot write output file '" + path + "'";
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error(file_sink_error(path));
    out << content;
    if (!out) throw io_error(file_sink_error(path));
}

Dataset load_dataset_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open dataset file '" + path + "'");
    return read_dataset(in);
}

LoadedParams load_params_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open model file '" + path + "'");
    return load_params(in);
}

// Every command writes a manifest next to its primary output; replaying the
// recorded argv reproduces the outputs byte for byte.
void write_manifest(const std::string& primary_output, const std::string& command,
                    const std::vector<std::string>& argv, const ordered_json& config,
                    const ordered_json& seeds, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs) {
    ordered_json m;
    m["command"] = command;
    m["argv"] = argv;
    m["config"] = config;
    m["seeds"] = seeds;
    m["inputs"] = inputs;
    m["outputs"] = outputs;
    m["versions"] = {{"app", kAppVersion}, {"dataset_container", 1}, {"params_container", 1}};
    write_text_file(primary_output + ".manifest.json", m.dump(2) + "\n");
}

std::vector<std::string> collect_argv(int argc, char** argv) {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(argc));
    for (int i = 0; i < argc; ++i) out.emplace_back(argv[i]);
    return out;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string profile_name = "keyword_bias";
    std::string out_path;
    SynthConfig cfg;
    bool cfg_overridden = false;
};

void run_synth(const SynthArgs& a, const std::vector<std::string>& argv) {
    SynthConfig cfg = a.cfg;
    cfg.validate();
    const Dataset ds = generate(cfg);
    std::ofstream out(a.out_path, std::ios::binary);
    if (!out) throw io_error(file_sink_error(a.out_path));
    write_dataset(ds, out);
    out.close();

    ordered_json config{{"profile", a.profile_name},
                        {"dim", cfg.feature_dim},
                        {"t-min", cfg.t_min},
                        {"t-max", cfg.t_max},
                        {"amplitude", cfg.signal_amplitude},
                        {"spans", cfg.spans_per_exchange},
                        {"span-length", cfg.span_length},
                        {"spikes", cfg.spike_count},
                        {"noise", cfg.noise_scale},
                        {"balance", cfg.class_balance},
                        {"count", cfg.count},
                        {"seed", cfg.seed},
                        {"dir-seed", cfg.evidence_direction_seed}};
    write_manifest(a.out_path, "synth", argv, config,
                   {{"seed", cfg.seed}, {"dir-seed", cfg.evidence_direction_seed}}, {},
                   {a.out_path});
    info("synth: wrote " + std::to_string(ds.records.size()) + " exchanges to " + a.out_path);
}

// ---------------------------------------------------------------------------
// shared aggregation/training flag mirrors
// ---------------------------------------------------------------------------

struct AggFlags {
    AggregationConfig cfg;
    std::string segvar_mode = "neg";
    CLI::Option* rmattn_window_opt = nullptr;

    void attach(CLI::App& cmd, Mirror& mirror) {
        mirror.add(cmd, "window", cfg.window, "sliding-window length M");
        mirror.add(cmd, "k", cfg.top_k, "supportive-window count K");
        mirror.add(cmd, "lambda", cfg.lambda, "segment-variance weight");
        mirror.add(cmd, "tau-s", cfg.tau_s, "segment-variance temperature");
        mirror.add(cmd, "tau", cfg.tau, "soft window-weighting temperature");
        mirror.add(cmd, "segvar-mode", segvar_mode, "segvar gating: neg|all|off");
        mirror.add(cmd, "rmattn-window", cfg.rmattn_window, "rolling attention window width");
        rmattn_window_opt = mirror.bindings.back().opt;
        mirror.add(cmd, "epsilon", cfg.epsilon, "denominator stabilizer");
        mirror.add(cmd, "gamma", cfg.gamma, "inference EMA coefficient");
    }

    AggregationConfig resolve() {
        cfg.segvar_mode = segvar_mode_from_name(segvar_mode);
        // The rolling attention width follows M unless set explicitly.
        if (rmattn_window_opt != nullptr && rmattn_window_opt->count() == 0 &&
            cfg.rmattn_window == 16) {
            cfg.rmattn_window = cfg.window;
        }
        cfg.validate();
        return cfg;
    }

    ordered_json echo() const {
        return {{"window", cfg.window},
                {"k", cfg.top_k},
                {"lambda", cfg.lambda},
                {"tau-s", cfg.tau_s},
                {"tau", cfg.tau},
                {"segvar-mode", segvar_mode},
                {"rmattn-window", cfg.rmattn_window},
                {"epsilon", cfg.epsilon},
                {"gamma", cfg.gamma}};
    }
};

struct TrainFlags {
    TrainConfig cfg;

    void attach(CLI::App& cmd, Mirror& mirror) {
        mirror.add(cmd, "lr", cfg.learning_rate, "learning rate");
        mirror.add(cmd, "batch", cfg.batch_size, "batch size");
        mirror.add(cmd, "epochs", cfg.max_epochs, "maximum epochs");
        mirror.add(cmd, "weight-decay", cfg.weight_decay, "decoupled weight decay");
        mirror.add(cmd, "beta1", cfg.beta1, "Adam beta1");
        mirror.add(cmd, "beta2", cfg.beta2, "Adam beta2");
        mirror.add(cmd, "adam-eps", cfg.adam_eps, "Adam epsilon");
        mirror.add(cmd, "patience", cfg.patience, "early-stopping patience (epochs)");
        mirror.add(cmd, "val-fraction", cfg.val_fraction, "validation split fraction");
        mirror.add(cmd, "seed", cfg.seed, "training seed");
        mirror.add(cmd, "hidden", cfg.hidden, "MLP hidden width (rmattn)");
    }

    ordered_json echo() const {
        return {{"lr", cfg.learning_rate},
                {"batch", cfg.batch_size},
                {"epochs", cfg.max_epochs},
                {"weight-decay", cfg.weight_decay},
                {"beta1", cfg.beta1},
                {"beta2", cfg.beta2},
                {"adam-eps", cfg.adam_eps},
                {"patience", cfg.patience},
                {"val-fraction", cfg.val_fraction},
                {"seed", cfg.seed},
                {"hidden", cfg.hidden}};
    }
};

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

void run_train(const std::string& data_path, const std::string& objective_name_str,
               const std::string& out_path, const std::string& history_path, AggFlags& agg,
               TrainFlags& tf, const std::vector<std::string>& argv) {
    const Objective objective = objective_from_name(objective_name_str);
    const AggregationConfig agg_cfg = agg.resolve();
    tf.cfg.validate();

    const Dataset ds = load_dataset_file(data_path);
    info("train: " + std::to_string(ds.records.size()) + " exchanges, d=" +
         std::to_string(ds.feature_dim) + ", objective=" + objective_name_str);
    const TrainResult result = train(ds, objective, agg_cfg, tf.cfg);

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw io_error(file_sink_error(out_path));
    save_params(result.params, objective, out);
    out.close();

    std::vector<std::string> outputs{out_path};
    if (!history_path.empty()) {
        std::ofstream hist(history_path, std::ios::binary);
        if (!hist) throw io_error(file_sink_error(history_path));
        write_history_log(result.history, hist);
        outputs.push_back(history_path);
    }
    if (log_level() >= 2) {
        for (std::size_t e = 0; e < result.history.epochs.size(); ++e) {
            std::cerr << "epoch " << e << ": train_loss=" << result.history.epochs[e].train_loss
                      << " val_metric=" << result.history.epochs[e].val_metric
                      << " wall=" << result.history.epochs[e].wall_time_sec << "s\n";
        }
    }

    ordered_json config{{"data", data_path}, {"objective", objective_name_str}};
    config.update(agg.echo());
    config.update(tf.echo());
    write_manifest(out_path, "train", argv, config, {{"seed", tf.cfg.seed}}, {data_path}, outputs);
    info("train: best epoch " + std::to_string(result.history.best_epoch) + ", model -> " +
         out_path);
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

void run_eval(const std::string& data_path, const std::string& model_path,
              const std::string& report_path, AggFlags& agg, double fpr_lo, double fpr_hi,
              double fpr_target, const std::vector<std::string>& argv) {
    const AggregationConfig agg_cfg = agg.resolve();
    const LoadedParams model = load_params_file(model_path);
    const Dataset ds = load_dataset_file(data_path);

    std::vector<double> scores;
    std::vector<int> labels;
    std::vector<DispersionStats> dispersion;
    scores.reserve(ds.records.size());
    for (const auto& rec : ds.records) {
        scores.push_back(score_exchange(model.params, agg_cfg, rec, model.objective));
        labels.push_back(rec.label);
        const auto zbar = window_means(token_logits(model.params, model.objective, rec),
                                       agg_cfg.window);
        dispersion.push_back(evidence_dispersion(zbar, agg_cfg.tau_s));
    }

    const RocCurve curve = build_roc(scores, labels);
    const DispersionSummary disp = summarize_dispersion(dispersion, labels);

    ordered_json config{{"data", data_path},
                        {"model", model_path},
                        {"objective", objective_name(model.objective)},
                        {"fpr-lo", fpr_lo},
                        {"fpr-hi", fpr_hi},
                        {"fpr-target", fpr_target}};
    config.update(agg.echo());

    ordered_json report;
    report["auroc"] = auroc(curve);
    report["log_auroc"] = log_auroc(curve, fpr_lo, fpr_hi);
    report["tpr_at_1pct_fpr"] = tpr_at_fpr(curve, fpr_target);
    report["counts"] = {{"exchanges", ds.records.size()},
                        {"positives", curve.positives},
                        {"negatives", curve.negatives}};
    report["config"] = config;
    auto disp_json = [](const DispersionStats& s) {
        return ordered_json{{"logit_variance", s.logit_variance},
                            {"probability_variance", s.probability_variance}};
    };
    report["dispersion"] = {{"all", disp_json(disp.all)},
                            {"positives", disp_json(disp.positives)},
                            {"negatives", disp_json(disp.negatives)}};
    write_text_file(report_path, report.dump(2) + "\n");
    write_manifest(report_path, "eval", argv, config, ordered_json::object(),
                   {data_path, model_path}, {report_path});
    info("eval: auroc=" + std::to_string(report["auroc"].get<double>()) +
         " log_auroc=" + std::to_string(report["log_auroc"].get<double>()) +
         " tpr@fpr=" + std::to_string(report["tpr_at_1pct_fpr"].get<double>()));
}

// ---------------------------------------------------------------------------
// score
// ---------------------------------------------------------------------------

void run_score(const std::string& data_path, const std::string& model_path,
               const std::string& out_path, AggFlags& agg, const std::vector<std::string>& argv) {
    const AggregationConfig agg_cfg = agg.resolve();
    const LoadedParams model = load_params_file(model_path);
    const Dataset ds = load_dataset_file(data_path);

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw io_error(file_sink_error(out_path));
    for (const auto& rec : ds.records) {
        const auto emissions = stream_exchange(model.params, agg_cfg, rec, model.objective);
        for (std::size_t t = 0; t < emissions.size(); ++t) {
            ordered_json line{{"stream_id", rec.exchange_id},
                              {"token_index", t},
                              {"raw_logit", emissions[t].raw_logit},
                              {"window_mean", emissions[t].window_mean},
                              {"ema_score", emissions[t].ema}};
            out << line.dump() << "\n";
        }
    }
    if (!out) throw io_error(file_sink_error(out_path));
    out.close();

    ordered_json config{{"data", data_path}, {"model", model_path}};
    config.update(agg.echo());
    write_manifest(out_path, "score", argv, config, ordered_json::object(),
                   {data_path, model_path}, {out_path});
    info("score: wrote token scores for " + std::to_string(ds.records.size()) + " exchanges");
}

// ---------------------------------------------------------------------------
// cipher
// ---------------------------------------------------------------------------

cipher::Scheme load_scheme_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open scheme file '" + path + "'");
    ordered_json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw format_error("scheme file '" + path + "': " + e.what());
    }
    cipher::Scheme s;
    if (!doc.contains("kind")) throw format_error("scheme file missing 'kind'");
    s.kind = cipher::kind_from_name(doc["kind"].get<std::string>());
    s.name = doc.value("name", std::string(cipher::kind_name(s.kind)));
    if (doc.contains("grid")) s.polybius_grid = doc["grid"].get<std::string>();
    if (doc.contains("table")) s.substitution_table = doc["table"].get<std::string>();
    s.validate();
    return s;
}

void run_cipher(const std::string& scheme_name, const std::string& scheme_file,
                const std::string& in_path, const std::string& out_path, const std::string& mode,
                const std::vector<std::string>& argv) {
    if (scheme_name.empty() == scheme_file.empty()) {
        throw config_error("cipher: exactly one of --scheme / --scheme-file is required");
    }
    if (mode != "encode" && mode != "decode") {
        throw config_error("cipher: --mode must be encode or decode");
    }
    const cipher::Scheme scheme =
        scheme_file.empty() ? cipher::scheme_by_name(scheme_name) : load_scheme_file(scheme_file);

    std::ifstream in(in_path);
    if (!in) throw io_error("cannot open corpus file '" + in_path + "'");
    std::vector<cipher::TextRecord> corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        ordered_json doc;
        try {
            doc = ordered_json::parse(line);
        } catch (const std::exception& e) {
            throw format_error("corpus line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!doc.contains("text")) {
            throw format_error("corpus line " + std::to_string(line_no) + ": missing 'text'");
        }
        cipher::TextRecord rec;
        rec.id = doc.value("id", "line" + std::to_string(line_no));
        rec.label = doc.value("label", 0);
        rec.text = doc["text"].get<std::string>();
        corpus.push_back(std::move(rec));
    }

    const auto transformed = cipher::transform_corpus(scheme, corpus, mode == "decode");
    std::string out_text;
    for (const auto& rec : transformed) {
        ordered_json doc{{"id", rec.id}, {"label", rec.label}, {"text", rec.text}};
        out_text += doc.dump();
        out_text += "\n";
    }
    write_text_file(out_path, out_text);

    ordered_json config{{"scheme", scheme.name.empty() ? cipher::kind_name(scheme.kind) : scheme.name},
                        {"scheme-file", scheme_file},
                        {"kind", cipher::kind_name(scheme.kind)},
                        {"in", in_path},
                        {"out", out_path},
                        {"mode", mode}};
    write_manifest(out_path, "cipher", argv, config, ordered_json::object(), {in_path},
                   {out_path});
    info("cipher: transformed " + std::to_string(transformed.size()) + " records");
}

const char* error_kind(const std::exception& e) {
    if (dynamic_cast<const invalid_input_error*>(&e)) return "invalid-input";
    if (dynamic_cast<const io_error*>(&e)) return "io";
    if (dynamic_cast<const format_error*>(&e)) return "format";
    if (dynamic_cast<const metric_error*>(&e)) return "metric";
    if (dynamic_cast<const config_error*>(&e)) return "config";
    if (dynamic_cast<const train_error*>(&e)) return "train";
    if (dynamic_cast<const decode_error*>(&e)) return "decode";
    return "internal";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"streaming safety probes over per-token activation streams"};
    app.require_subcommand(1);
    const std::vector<std::string> argv_copy = collect_argv(argc, argv);

    std::string config_path;

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic activation dataset");
    Mirror synth_mirror;
    SynthArgs sa;
    // The profile sets the config baseline before parsing, so explicit flags
    // and config-file keys land on top of it.
    for (std::size_t i = 1; i < argv_copy.size(); ++i) {
        const std::string& arg = argv_copy[i];
        if (arg == "--profile" && i + 1 < argv_copy.size()) {
            sa.profile_name = argv_copy[i + 1];
        } else if (arg.rfind("--profile=", 0) == 0) {
            sa.profile_name = arg.substr(10);
        }
    }
    try {
        sa.cfg = profile(sa.profile_name);
    } catch (const streamprobe::error& e) {
        std::cerr << "error: " << error_kind(e) << ": " << e.what() << "\n";
        return 1;
    }
    synth->add_option("--profile", sa.profile_name, "profile: separable | keyword_bias");
    synth->add_option("--out", sa.out_path, "output dataset path")->required();
    synth->add_option("--config", config_path, "JSON config mirroring flags (flags win)");
    synth_mirror.add(*synth, "count", sa.cfg.count, "number of exchanges");
    synth_mirror.add(*synth, "seed", sa.cfg.seed, "generation seed");
    synth_mirror.add(*synth, "dim", sa.cfg.feature_dim, "feature dimension");
    synth_mirror.add(*synth, "t-min", sa.cfg.t_min, "minimum exchange length");
    synth_mirror.add(*synth, "t-max", sa.cfg.t_max, "maximum exchange length");
    synth_mirror.add(*synth, "amplitude", sa.cfg.signal_amplitude, "planted signal amplitude");
    synth_mirror.add(*synth, "spans", sa.cfg.spans_per_exchange, "evidence spans per positive");
    synth_mirror.add(*synth, "span-length", sa.cfg.span_length, "tokens per evidence span");
    synth_mirror.add(*synth, "spikes", sa.cfg.spike_count, "isolated spikes per hard negative");
    synth_mirror.add(*synth, "noise", sa.cfg.noise_scale, "background noise scale");
    synth_mirror.add(*synth, "balance", sa.cfg.class_balance, "fraction of positives");
    synth_mirror.add(*synth, "dir-seed", sa.cfg.evidence_direction_seed,
                     "evidence direction seed");

    // train
    auto* train_cmd = app.add_subcommand("train", "train a probe objective");
    Mirror train_mirror;
    std::string train_data, train_objective = "topk-segvar", train_out, train_history;
    train_cmd->add_option("--data", train_data, "training dataset")->required();
    train_cmd->add_option("--out", train_out, "output model path")->required();
    train_cmd->add_option("--history", train_history, "optional history log path");
    train_cmd->add_option("--config", config_path, "JSON config mirroring flags (flags win)");
    train_mirror.add(*train_cmd, "objective", train_objective,
                     "mean|softmax|attention|rmattn|swim|topk|topk-segvar");
    AggFlags train_agg;
    train_agg.attach(*train_cmd, train_mirror);
    TrainFlags train_tf;
    train_tf.attach(*train_cmd, train_mirror);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a trained probe on a dataset");
    Mirror eval_mirror;
    std::string eval_data, eval_model, eval_report;
    double fpr_lo = 1e-3, fpr_hi = 1e-1, fpr_target = 0.01;
    eval_cmd->add_option("--data", eval_data, "evaluation dataset")->required();
    eval_cmd->add_option("--model", eval_model, "trained model file")->required();
    eval_cmd->add_option("--report", eval_report, "output metric report path")->required();
    eval_cmd->add_option("--config", config_path, "JSON config mirroring flags (flags win)");
    eval_mirror.add(*eval_cmd, "fpr-lo", fpr_lo, "log-AUROC band lower FPR");
    eval_mirror.add(*eval_cmd, "fpr-hi", fpr_hi, "log-AUROC band upper FPR");
    eval_mirror.add(*eval_cmd, "fpr-target", fpr_target, "TPR-at-FPR target");
    AggFlags eval_agg;
    eval_agg.attach(*eval_cmd, eval_mirror);

    // score
    auto* score_cmd = app.add_subcommand("score", "emit per-token streaming scores");
    Mirror score_mirror;
    std::string score_data, score_model, score_out;
    score_cmd->add_option("--data", score_data, "dataset to score")->required();
    score_cmd->add_option("--model", score_model, "trained model file")->required();
    score_cmd->add_option("--out", score_out, "output JSONL path")->required();
    score_cmd->add_option("--config", config_path, "JSON config mirroring flags (flags win)");
    AggFlags score_agg;
    score_agg.attach(*score_cmd, score_mirror);

    // cipher
    auto* cipher_cmd = app.add_subcommand("cipher", "transform a JSONL text corpus");
    Mirror cipher_mirror;
    std::string cipher_scheme, cipher_scheme_file, cipher_in, cipher_out, cipher_mode = "encode";
    cipher_cmd->add_option("--in", cipher_in, "input corpus (JSONL with id/label/text)")
        ->required();
    cipher_cmd->add_option("--out", cipher_out, "output corpus path")->required();
    cipher_cmd->add_option("--config", config_path, "JSON config mirroring flags (flags win)");
    cipher_mirror.add(*cipher_cmd, "scheme", cipher_scheme,
                      "ascii_decimal|fibonacci_index|polybius|adjacent_swap|WALNUT50");
    cipher_mirror.add(*cipher_cmd, "scheme-file", cipher_scheme_file, "JSON scheme description");
    cipher_mirror.add(*cipher_cmd, "mode", cipher_mode, "encode|decode");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << "error: cli: " << e.what() << "\n";
        return 2;
    }

    try {
        if (synth->parsed()) {
            if (!config_path.empty()) synth_mirror.apply_config(config_path);
            run_synth(sa, argv_copy);
        } else if (train_cmd->parsed()) {
            if (!config_path.empty()) train_mirror.apply_config(config_path);
            run_train(train_data, train_objective, train_out, train_history, train_agg, train_tf,
                      argv_copy);
        } else if (eval_cmd->parsed()) {
            if (!config_path.empty()) eval_mirror.apply_config(config_path);
            run_eval(eval_data, eval_model, eval_report, eval_agg, fpr_lo, fpr_hi, fpr_target,
                     argv_copy);
        } else if (score_cmd->parsed()) {
            if (!config_path.empty()) score_mirror.apply_config(config_path);
            run_score(score_data, score_model, score_out, score_agg, argv_copy);
        } else if (cipher_cmd->parsed()) {
            if (!config_path.empty()) cipher_mirror.apply_config(config_path);
            run_cipher(cipher_scheme, cipher_scheme_file, cipher_in, cipher_out, cipher_mode,
                       argv_copy);
        }
    } catch (const streamprobe::error& e) {
        std::cerr << "error: " << error_kind(e) << ": " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: internal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
