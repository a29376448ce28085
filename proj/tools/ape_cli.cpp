// Command-line front end: gen | train | explain | eval.
// Exit codes: 0 success, 1 usage error, 2 runtime error.

#include "ape/ape.hpp"
#include "ape/common.hpp"
#include "ape/evalharness.hpp"
#include "ape/models.hpp"
#include "ape/rng.hpp"
#include "ape/tabular.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <numeric>

namespace {

using nlohmann::json;

ape::SyntheticKind parse_kind(const std::string& s) {
    if (s == "moons") return ape::SyntheticKind::Moons;
    if (s == "circles") return ape::SyntheticKind::Circles;
    if (s == "blobs") return ape::SyntheticKind::Blobs;
    throw CLI::ValidationError("--kind must be one of moons|circles|blobs");
}

ape::ModelKind parse_model(const std::string& s) {
    if (s == "tree") return ape::ModelKind::DecisionTree;
    if (s == "forest") return ape::ModelKind::RandomForest;
    if (s == "logreg") return ape::ModelKind::LogisticRegression;
    throw CLI::ValidationError("--model must be one of tree|forest|logreg");
}

ape::DiscretizerMethod parse_discretizer(const std::string& s) {
    if (s == "quartile") return ape::DiscretizerMethod::Quartile;
    if (s == "decile") return ape::DiscretizerMethod::Decile;
    if (s == "entropy") return ape::DiscretizerMethod::Entropy;
    if (s == "mdlp") return ape::DiscretizerMethod::MDLP;
    if (s == "kmeans") return ape::DiscretizerMethod::KMeans;
    throw CLI::ValidationError("--discretizer must be one of quartile|decile|entropy|mdlp|kmeans");
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ape::Error("cannot write '" + path + "'");
    out << content;
}

// Optional JSON config file; command-line flags take precedence over it.
json load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ape::Error("cannot open config '" + path + "'");
    json j;
    in >> j;
    return j;
}

template <typename T>
void apply_config(const json& cfg, const CLI::App& app, const std::string& flag, const std::string& key, T& value) {
    if (app.count(flag) == 0 && cfg.contains(key)) value = cfg.at(key).get<T>();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adapted local explanations for tabular black-box classifiers"};
    app.require_subcommand(1);

    // --- gen ---------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "Generate a synthetic dataset CSV");
    std::string gen_kind = "moons", gen_out = "data.csv";
    std::size_t gen_n = 1000;
    double gen_noise = 0.1;
    std::uint64_t gen_seed = 0;
    gen->add_option("--kind", gen_kind, "moons|circles|blobs")->capture_default_str();
    gen->add_option("--n", gen_n, "number of rows")->capture_default_str();
    gen->add_option("--noise", gen_noise, "gaussian noise level")->capture_default_str();
    gen->add_option("--seed", gen_seed, "rng seed")->capture_default_str();
    gen->add_option("-o,--out", gen_out, "output CSV path")->capture_default_str();

    // --- train -------------------------------------------------------------
    auto* train = app.add_subcommand("train", "Train a built-in classifier");
    std::string train_data, train_label = "label", train_model_kind = "forest", train_out = "model.json";
    int train_trees = 20, train_depth = -1;
    double train_holdout = 0.3;
    std::uint64_t train_seed = 0;
    train->add_option("--data", train_data, "training CSV")->required();
    train->add_option("--label-col", train_label, "label column name")->capture_default_str();
    train->add_option("--model", train_model_kind, "tree|forest|logreg")->capture_default_str();
    train->add_option("--trees", train_trees, "forest size")->capture_default_str();
    train->add_option("--depth", train_depth, "max tree depth (-1 = unbounded)")->capture_default_str();
    train->add_option("--holdout", train_holdout, "test fraction for the accuracy line")->capture_default_str();
    train->add_option("--seed", train_seed, "rng seed")->capture_default_str();
    train->add_option("-o,--out", train_out, "output model JSON")->capture_default_str();

    // --- explain -----------------------------------------------------------
    auto* explain = app.add_subcommand("explain", "Explain one prediction");
    std::string ex_data, ex_label = "label", ex_model, ex_out = "explanation.json", ex_instance, ex_config;
    std::string ex_fallback = "tree", ex_discretizer = "mdlp", ex_variant = "prose";
    long long ex_row = -1;
    std::uint64_t ex_seed = 0;
    std::size_t ex_n = 2000;
    double ex_si = 1.0, ex_folding = 1.0, ex_tau = 0.95;
    bool ex_render = false;
    explain->add_option("--data", ex_data, "training CSV")->required();
    explain->add_option("--label-col", ex_label, "label column name")->capture_default_str();
    explain->add_option("--model", ex_model, "model JSON path")->required();
    explain->add_option("--row", ex_row, "target row index in the CSV");
    explain->add_option("--instance", ex_instance, "inline target as JSON feature map");
    explain->add_option("--seed", ex_seed, "rng seed")->capture_default_str();
    explain->add_option("--n", ex_n, "field sample size")->capture_default_str();
    explain->add_option("--fallback", ex_fallback, "tree|anchor")->capture_default_str();
    explain->add_option("--discretizer", ex_discretizer, "anchor discretizer")->capture_default_str();
    explain->add_option("--variant", ex_variant, "numeric perturbation variant: prose|literal")->capture_default_str();
    explain->add_option("--si-threshold", ex_si, "separability gate")->capture_default_str();
    explain->add_option("--folding-threshold", ex_folding, "unimodality gate")->capture_default_str();
    explain->add_option("--tau", ex_tau, "precision threshold")->capture_default_str();
    explain->add_option("--config", ex_config, "JSON config file (flags take precedence)");
    explain->add_flag("--render", ex_render, "print the human-readable rendering to stdout");
    explain->add_option("-o,--out", ex_out, "output explanation JSON")->capture_default_str();

    // --- eval --------------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "Run an experiment protocol");
    std::string eval_kind, eval_out = "report.json", eval_format = "json";
    std::uint64_t eval_seed = 0;
    std::size_t eval_targets = 100;
    unsigned eval_jobs = 1;
    bool eval_timings = false;
    eval->add_option("protocol", eval_kind, "adherence|fidelity|cfquality|ablation")->required();
    eval->add_option("--seed", eval_seed, "rng seed")->capture_default_str();
    eval->add_option("--targets", eval_targets, "targets per condition")->capture_default_str();
    eval->add_option("--jobs", eval_jobs, "worker threads")->capture_default_str();
    eval->add_option("--format", eval_format, "json|csv")->capture_default_str();
    eval->add_flag("--timings", eval_timings, "include wall times in the report (non-deterministic)");
    eval->add_option("-o,--out", eval_out, "output report path")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 1;
    }

    try {
        if (*gen) {
            const ape::Dataset ds = ape::synthesize_dataset(parse_kind(gen_kind), gen_n, gen_noise, gen_seed);
            ape::write_csv(ds, gen_out);
            std::cerr << "wrote " << ds.n_rows() << " rows to " << gen_out << "\n";
        } else if (*train) {
            ape::Dataset ds = ape::load_dataset(train_data, std::nullopt, train_label);
            if (!ds.labels) throw ape::InvalidArgument("training requires --label-col");

            // Deterministic 70/30 split for the accuracy line.
            ape::Rng rng(train_seed);
            std::vector<std::size_t> idx(ds.n_rows());
            std::iota(idx.begin(), idx.end(), 0);
            for (std::size_t i = idx.size(); i-- > 1;) std::swap(idx[i], idx[rng.index(i + 1)]);
            const auto n_test = static_cast<std::size_t>(train_holdout * static_cast<double>(idx.size()));
            ape::Dataset train_ds;
            train_ds.specs = ds.specs;
            std::vector<int> train_labels;
            std::vector<ape::Instance> test_rows;
            std::vector<int> test_labels;
            for (std::size_t i = 0; i < idx.size(); ++i) {
                if (i < n_test) {
                    test_rows.push_back(ds.rows[idx[i]]);
                    test_labels.push_back((*ds.labels)[idx[i]]);
                } else {
                    train_ds.rows.push_back(ds.rows[idx[i]]);
                    train_labels.push_back((*ds.labels)[idx[i]]);
                }
            }
            train_ds.labels = train_labels;
            train_ds.recompute_stats();
            train_ds.n_classes = ds.n_classes;

            ape::ModelConfig mc;
            mc.kind = parse_model(train_model_kind);
            mc.n_trees = train_trees;
            mc.max_depth = train_depth;
            const auto model = ape::train_model(train_ds, mc, train_seed);
            ape::save_model(*model, train_out);
            const double train_acc = ape::accuracy(*model, train_ds.rows, *train_ds.labels);
            std::cout << "accuracy: train=" << train_acc;
            if (!test_rows.empty()) std::cout << " test=" << ape::accuracy(*model, test_rows, test_labels);
            std::cout << "\n";
        } else if (*explain) {
            json cfg_file = ex_config.empty() ? json::object() : load_config(ex_config);
            apply_config(cfg_file, *explain, "--seed", "seed", ex_seed);
            apply_config(cfg_file, *explain, "--n", "n_samples", ex_n);
            apply_config(cfg_file, *explain, "--fallback", "fallback", ex_fallback);
            apply_config(cfg_file, *explain, "--discretizer", "discretizer", ex_discretizer);
            apply_config(cfg_file, *explain, "--variant", "variant", ex_variant);
            apply_config(cfg_file, *explain, "--si-threshold", "si_threshold", ex_si);
            apply_config(cfg_file, *explain, "--folding-threshold", "folding_threshold", ex_folding);
            apply_config(cfg_file, *explain, "--tau", "tau", ex_tau);

            const ape::Dataset ds = ape::load_dataset(ex_data, std::nullopt, ex_label);
            const auto model = ape::load_model(ex_model);

            ape::Instance target;
            if (ex_row >= 0) {
                if (static_cast<std::size_t>(ex_row) >= ds.n_rows())
                    throw ape::InvalidArgument("--row out of range");
                target = ds.rows[static_cast<std::size_t>(ex_row)];
            } else if (!ex_instance.empty()) {
                const json inst = json::parse(ex_instance);
                target.resize(ds.n_features());
                for (std::size_t j = 0; j < ds.n_features(); ++j) {
                    const auto& spec = ds.specs[j];
                    if (!inst.contains(spec.name))
                        throw ape::InvalidArgument("--instance is missing feature '" + spec.name + "'");
                    if (spec.is_categorical()) {
                        const auto cat = inst.at(spec.name).get<std::string>();
                        const auto it = std::find(spec.categories.begin(), spec.categories.end(), cat);
                        if (it == spec.categories.end())
                            throw ape::InvalidArgument("unknown category '" + cat + "' for '" + spec.name + "'");
                        target[j] = static_cast<double>(it - spec.categories.begin());
                    } else {
                        target[j] = inst.at(spec.name).get<double>();
                    }
                }
            } else {
                throw ape::InvalidArgument("explain needs --row or --instance");
            }

            ape::ExplainConfig ec;
            ec.seed = ex_seed;
            ec.n_samples = ex_n;
            ec.si_threshold = ex_si;
            ec.folding_threshold = ex_folding;
            ec.tau = ex_tau;
            ec.fallback = ex_fallback == "anchor" ? ape::FallbackKind::Anchor : ape::FallbackKind::Tree;
            ec.discretizer = parse_discretizer(ex_discretizer);
            ec.variant = ex_variant == "literal" ? ape::NumericVariant::Literal : ape::NumericVariant::Prose;

            const ape::Explanation exp = ape::explain(ds, *model, target, ec);
            write_file(ex_out, ape::explanation_to_json(exp, ds.specs));
            if (ex_render) std::cout << exp.rendering << "\n";
            std::cerr << "verdict: " << (exp.verdict.linear_suitable ? "linear" : "rule_based")
                      << ", wall time " << exp.wall_time_sec << "s\n";
        } else if (*eval) {
            ape::HarnessConfig hc;
            hc.seed = eval_seed;
            hc.n_targets = eval_targets;
            hc.jobs = eval_jobs;
            ape::ExperimentReport rep;
            if (eval_kind == "adherence")
                rep = ape::run_adherence_experiment(hc);
            else if (eval_kind == "fidelity")
                rep = ape::run_glassbox_fidelity(hc);
            else if (eval_kind == "cfquality")
                rep = ape::run_cf_quality(hc);
            else if (eval_kind == "ablation")
                rep = ape::run_ablation(hc);
            else
                throw CLI::ValidationError("protocol must be adherence|fidelity|cfquality|ablation");
            write_file(eval_out, eval_format == "csv" ? rep.to_csv() : rep.to_json(eval_timings));
            std::cerr << "experiment " << rep.id << " finished in " << rep.wall_time_sec << "s\n";
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ape::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
