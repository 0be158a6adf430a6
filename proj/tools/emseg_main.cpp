// Command-line front end: generic clustering, superpixel segmentation,
// complexity benchmarking and a toy decoder demo on top of the emseg library.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "emseg/attention.hpp"
#include "emseg/color.hpp"
#include "emseg/em.hpp"
#include "emseg/error.hpp"
#include "emseg/ffn.hpp"
#include "emseg/image.hpp"
#include "emseg/matrix.hpp"
#include "emseg/rng.hpp"
#include "emseg/superpixel.hpp"

namespace {

using json = nlohmann::ordered_json;
using emseg::Matrix;

// command-line misuse distinct from data errors: exits with code 1
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const std::uint64_t v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw UsageError("invalid " + what + ": '" + s + "'");
    }
}

struct ClusterOpts {
    std::string input, out, mode = "mean", config;
    std::size_t k = 2, t_max = 100;
    double tol = 1e-9;
    std::uint64_t seed = 0;
};

struct SpixOpts {
    std::string input, gt, out_labels, out_overlay, config;
    std::size_t k = 100, t = 3;
    double color_weight = 1.0, position_weight = 10.0;
    bool baseline_slic = false;
};

struct BenchOpts {
    std::vector<std::size_t> hw_list{1024};
    std::vector<std::size_t> t_list{1, 2, 3};
    std::vector<std::string> variant_list{"recurrent", "vanilla", "stacked"};
    std::size_t k = 32, d = 64;
    std::string out, config;
};

struct DemoOpts {
    std::uint64_t seed = 0;
    std::size_t k = 4, levels = 3, t = 3;
    std::string out, config;
    bool zero_weights = false;
};

struct Cli {
    CLI::App app{"EM clustering, recurrent cross-attention and superpixel segmentation toolkit",
                 "emseg"};
    CLI::App *cluster, *superpixel, *bench, *demo;
    ClusterOpts c;
    SpixOpts s;
    BenchOpts b;
    DemoOpts d;

    Cli() {
        app.require_subcommand(1);

        cluster = app.add_subcommand("cluster", "Cluster CSV points with alternating "
                                                "assignment/update refinement");
        cluster->add_option("--input", c.input, "points CSV: one point per line, '#' comments");
        cluster->add_option("--k", c.k, "number of clusters");
        cluster->add_option("--mode", c.mode, "center update: sum (unnormalized) or mean")
            ->check(CLI::IsMember({"sum", "mean"}));
        cluster->add_option("--t-max", c.t_max, "iteration cap");
        cluster->add_option("--tol", c.tol, "early-stop threshold on center movement; <=0 disables");
        cluster->add_option("--seed", c.seed, "seed for the initial center draw");
        cluster->add_option("--out", c.out, "output CSV [point_index, hard_label, p_0..p_{K-1}]");
        cluster->add_option("--config", c.config, "key=value defaults file; flags override");

        superpixel = app.add_subcommand("superpixel", "Segment an image into superpixels");
        superpixel->add_option("--input", s.input, "input image (.ppm P6 or .png)");
        superpixel->add_option("--k", s.k, "requested superpixel count");
        superpixel->add_option("--t", s.t,
                               "assignment rounds (>=1); the final round labels the pixels");
        superpixel->add_option("--color-weight", s.color_weight, "scale on the Lab channels");
        superpixel->add_option("--position-weight", s.position_weight,
                               "scale on the grid-normalized coordinate channels");
        superpixel->add_option("--gt", s.gt, "ground-truth label PGM; enables the asa metric");
        superpixel->add_option("--out-labels", s.out_labels, "label map output (.pgm, P2)");
        superpixel->add_option("--out-overlay", s.out_overlay,
                               "input image with red boundary overlay (.ppm or .png)");
        superpixel->add_flag("--baseline-slic", s.baseline_slic,
                             "also run the classic local k-means baseline on the same inputs");
        superpixel->add_option("--config", s.config, "key=value defaults file; flags override");

        bench = app.add_subcommand("bench", "Exact operation counts and wall times for the "
                                            "attention variants");
        bench->add_option("--hw-list", b.hw_list, "pixel counts to sweep")->delimiter(',');
        bench->add_option("--k", b.k, "cluster (query) count");
        bench->add_option("--d", b.d, "embedding dim");
        bench->add_option("--t-list", b.t_list, "iteration counts to sweep")->delimiter(',');
        bench->add_option("--variant-list", b.variant_list,
                          "any of recurrent, vanilla, stacked")
            ->delimiter(',')
            ->check(CLI::IsMember({"recurrent", "vanilla", "stacked"}));
        bench->add_option("--out", b.out, "also write the JSON records to this file");
        bench->add_option("--config", b.config, "key=value defaults file; flags override");

        demo = app.add_subcommand("demo-decoder", "Run the toy multi-level decoder on a seeded "
                                                  "synthetic pyramid");
        demo->add_option("--seed", d.seed, "seed for weights, features and initial centers");
        demo->add_option("--k", d.k, "query (center) count");
        demo->add_option("--levels", d.levels, "pyramid levels (coarse to fine)");
        demo->add_option("--t", d.t, "refinement rounds per layer");
        demo->add_option("--out", d.out, "trace JSON output path");
        demo->add_flag("--zero-weights", d.zero_weights,
                       "zero all projections and MLPs (centers must pass through unchanged)");
        demo->add_option("--config", d.config, "key=value defaults file; flags override");
    }

    CLI::App* active() {
        for (CLI::App* sub : {cluster, superpixel, bench, demo}) {
            if (sub->parsed()) return sub;
        }
        return nullptr;
    }
};

// key=value lines, '#' comments; returns --key=value tokens for keys the
// command knows and the user did not already pass on the command line
std::vector<std::string> config_tokens(const std::string& path, CLI::App* sub) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    std::vector<std::string> tokens;
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string v) {
        const auto a = v.find_first_not_of(" \t\r");
        const auto b = v.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : v.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config " + path + " line " + std::to_string(lineno) +
                             ": expected key=value");
        }
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key.empty()) {
            throw UsageError("config " + path + " line " + std::to_string(lineno) + ": empty key");
        }
        CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (opt == nullptr) {
            throw UsageError("config " + path + ": unknown key '" + key + "' for command '" +
                             sub->get_name() + "'");
        }
        if (opt->count() > 0) continue;  // explicit flag wins
        if (opt->get_expected_min() == 0) {
            // boolean flag: accept true/false
            if (value == "true" || value == "1") tokens.push_back("--" + key);
            else if (value != "false" && value != "0")
                throw UsageError("config " + path + ": flag '" + key + "' takes true or false");
        } else {
            tokens.push_back("--" + key + "=" + value);
        }
    }
    return tokens;
}

// ---------------------------------------------------------------- cluster

Matrix parse_points_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw emseg::Error("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0, width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string stripped = line;
        stripped.erase(0, stripped.find_first_not_of(" \t"));
        if (stripped.empty() || stripped[0] == '#') continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
                while (used < cell.size() &&
                       std::isspace(static_cast<unsigned char>(cell[used]))) {
                    ++used;
                }
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw emseg::ParseError(path + " line " + std::to_string(lineno) +
                                            ": bad number '" + cell + "'",
                                        lineno);
            }
        }
        if (row.empty()) {
            throw emseg::ParseError(path + " line " + std::to_string(lineno) + ": empty row",
                                    lineno);
        }
        if (width == 0) width = row.size();
        if (row.size() != width) {
            throw emseg::ParseError(path + " line " + std::to_string(lineno) + ": expected " +
                                        std::to_string(width) + " values, got " +
                                        std::to_string(row.size()),
                                    lineno);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw emseg::ParseError(path + ": no data rows", 0);
    Matrix m(rows.size(), width);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < width; ++c) m(r, c) = rows[r][c];
    return m;
}

int cmd_cluster(const ClusterOpts& o) {
    if (o.input.empty()) throw UsageError("cluster: --input is required");
    if (o.out.empty()) throw UsageError("cluster: --out is required");
    Matrix x = parse_points_csv(o.input);
    if (o.k == 0) throw UsageError("cluster: --k must be >= 1");
    if (o.k > x.rows()) {
        throw emseg::RangeError("insufficient points: k " + std::to_string(o.k) +
                                " exceeds point count " + std::to_string(x.rows()));
    }
    emseg::EmOptions opts;
    opts.t_max = o.t_max;
    opts.tol = o.tol;
    opts.mode = o.mode == "sum" ? emseg::CenterUpdate::sum : emseg::CenterUpdate::weighted_mean;
    emseg::ClusterResult res = emseg::em_cluster(x, emseg::forgy_init(x, o.k, o.seed), opts);

    std::ofstream out(o.out, std::ios::trunc);
    if (!out) throw emseg::Error("cannot open " + o.out + " for writing");
    out << "# point_index,hard_label";
    for (std::size_t ki = 0; ki < o.k; ++ki) out << ",p_" << ki;
    out << "\n";
    for (std::size_t p = 0; p < x.rows(); ++p) {
        std::size_t label = 0;
        for (std::size_t ki = 0; ki < o.k; ++ki) {
            if (res.hard.probs(ki, p) == 1.0) label = ki;
        }
        out << p << "," << label;
        for (std::size_t ki = 0; ki < o.k; ++ki) out << "," << fmt_double(res.soft.probs(ki, p));
        out << "\n";
    }
    if (!out) throw emseg::Error("short write to " + o.out);

    for (std::size_t i = 0; i < res.objective_trace.size(); ++i) {
        json line;
        line["iteration"] = i;
        line["objective"] = res.objective_trace[i];
        std::cout << line.dump() << "\n";
    }
    json tail;
    tail["converged"] = res.converged;
    tail["iterations"] = res.iterations_run;
    std::cout << tail.dump() << "\n";
    return 0;
}

// ------------------------------------------------------------- superpixel

// flops is null for methods without an operation-count model (the baseline)
json spix_metrics(const emseg::LabelMap& labels, const emseg::LabelMap* gt,
                  std::size_t k_requested, std::size_t iters, json flops) {
    json m;
    m["k_requested"] = k_requested;
    m["k_actual"] = labels.label_count();
    if (gt != nullptr) {
        m["asa"] = emseg::asa(labels, *gt);
    } else {
        m["asa"] = nullptr;
    }
    m["co"] = emseg::compactness(labels);
    m["iters"] = iters;
    m["flops"] = std::move(flops);
    return m;
}

int cmd_superpixel(const SpixOpts& o) {
    if (o.input.empty()) throw UsageError("superpixel: --input is required");
    emseg::RgbImage img = emseg::load_image(o.input);

    emseg::SuperpixelConfig cfg;
    cfg.k_requested = o.k;
    cfg.t_iterations = o.t;
    cfg.color_weight = o.color_weight;
    cfg.position_weight = o.position_weight;
    emseg::SegmentationResult res = emseg::segment_superpixels(img, cfg);

    emseg::LabelMap gt;
    const bool have_gt = !o.gt.empty();
    if (have_gt) gt = emseg::load_label_pgm(o.gt);

    json ours = spix_metrics(res.labels, have_gt ? &gt : nullptr, o.k, res.iterations, res.flops);
    if (o.baseline_slic) {
        json tagged;
        tagged["method"] = "ours";
        tagged.update(ours);
        std::cout << tagged.dump() << "\n";
        emseg::LabelMap slic = emseg::slic_baseline(img, o.k, o.position_weight, 10);
        json base;
        base["method"] = "slic";
        base.update(spix_metrics(slic, have_gt ? &gt : nullptr, o.k, 10, nullptr));
        std::cout << base.dump() << "\n";
    } else {
        std::cout << ours.dump() << "\n";
    }

    if (!o.out_labels.empty()) emseg::save_label_pgm(res.labels, o.out_labels);
    if (!o.out_overlay.empty()) {
        emseg::save_image(emseg::boundary_overlay(img, res.labels), o.out_overlay);
    }
    return 0;
}

// ------------------------------------------------------------------ bench

double median5(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

int cmd_bench(const BenchOpts& o) {
    if (o.hw_list.empty() || o.t_list.empty() || o.variant_list.empty()) {
        throw UsageError("bench: empty sweep list");
    }
    if (o.k == 0 || o.d == 0) throw UsageError("bench: --k and --d must be >= 1");
    std::uint64_t seed = 9001;
    if (const char* env = std::getenv("EMSEG_SEED")) seed = parse_u64(env, "EMSEG_SEED");

    json table = json::array();
    for (std::size_t hw : o.hw_list) {
        if (hw == 0) throw UsageError("bench: pixel count must be >= 1");
        emseg::Rng rng(seed + hw);
        emseg::FeatureMap map(1, hw, o.d);
        for (double& v : map.data) v = rng.gaussian();
        emseg::CenterSet c0;
        c0.centers = Matrix(o.k, o.d);
        for (double& v : c0.centers.data()) v = rng.gaussian();
        emseg::CenterSet cq;  // per-pixel queries for the quadratic variant
        cq.centers = map.to_matrix();

        for (std::size_t t : o.t_list) {
            if (t == 0) throw UsageError("bench: t must be >= 1");
            for (const std::string& variant : o.variant_list) {
                emseg::AttentionVariant av = variant == "recurrent"
                                                 ? emseg::AttentionVariant::recurrent
                                                 : variant == "vanilla"
                                                       ? emseg::AttentionVariant::vanilla
                                                       : emseg::AttentionVariant::stacked;
                std::vector<emseg::AttentionParams> step_params;
                for (std::size_t s = 0; s < t; ++s) {
                    step_params.push_back(emseg::AttentionParams::seeded(o.d, seed + 31 * s));
                }
                auto run_once = [&]() {
                    switch (av) {
                        case emseg::AttentionVariant::recurrent:
                            emseg::recurrent_cross_attention(c0, map, step_params[0], t);
                            break;
                        case emseg::AttentionVariant::vanilla:
                            emseg::vanilla_cross_attention(cq, map, step_params[0]);
                            break;
                        case emseg::AttentionVariant::stacked: {
                            emseg::CenterSet c = c0;
                            for (std::size_t s = 0; s < t; ++s) {
                                c = emseg::cluster_softmax_attention(c, map, step_params[s]);
                            }
                            break;
                        }
                    }
                };
                run_once();  // warm-up
                std::vector<double> times;
                for (int rep = 0; rep < 5; ++rep) {
                    const auto start = std::chrono::steady_clock::now();
                    run_once();
                    const auto stop = std::chrono::steady_clock::now();
                    times.push_back(std::chrono::duration<double>(stop - start).count());
                }
                json rec;
                rec["hw"] = hw;
                rec["k"] = o.k;
                rec["d"] = o.d;
                rec["t"] = t;
                rec["variant"] = variant;
                rec["flops"] = emseg::flop_count(1, hw, o.k, o.d, t, av);
                rec["median_seconds"] = median5(times);
                table.push_back(std::move(rec));
            }
        }
    }
    std::cout << table.dump() << "\n";
    if (!o.out.empty()) {
        std::ofstream out(o.out, std::ios::trunc);
        if (!out) throw emseg::Error("cannot open " + o.out + " for writing");
        out << table.dump(2) << "\n";
    }
    return 0;
}

// ----------------------------------------------------------- demo-decoder

int cmd_demo(const DemoOpts& o) {
    if (o.out.empty()) throw UsageError("demo-decoder: --out is required");
    if (o.k == 0 || o.levels == 0 || o.t == 0) {
        throw UsageError("demo-decoder: --k, --levels and --t must be >= 1");
    }
    const std::size_t d = 8;
    emseg::Rng rng(o.seed);

    std::vector<emseg::FeatureMap> pyramid;
    for (std::size_t l = 0; l < o.levels; ++l) {
        const std::size_t side = 4u << l;  // 4, 8, 16, ... coarse to fine
        emseg::FeatureMap map(side, side, d);
        for (double& v : map.data) v = rng.gaussian();
        pyramid.push_back(std::move(map));
    }
    emseg::CenterSet c0;
    c0.centers = Matrix(o.k, d);
    for (double& v : c0.centers.data()) v = rng.gaussian();

    emseg::DecoderConfig cfg;
    cfg.levels = o.levels;
    cfg.t_iterations = o.t;
    std::vector<emseg::DecoderLayer> layers;
    for (std::size_t i = 0; i < 2 * o.levels; ++i) {
        emseg::DecoderLayer layer;
        if (o.zero_weights) {
            layer.attention.w_q = Matrix(d, d);
            layer.attention.w_k = Matrix(d, d);
            layer.attention.w_v = Matrix(d, d);
            layer.attention.heads = 1;
            layer.attention.head_merge = Matrix::identity(d);
            layer.mlp = emseg::FfnHead::zero(d, 2 * d, d);
        } else {
            layer.attention = emseg::AttentionParams::seeded(d, o.seed + 101 * (i + 1));
            layer.mlp = emseg::FfnHead::seeded(d, 2 * d, d, o.seed + 211 * (i + 1));
        }
        layers.push_back(std::move(layer));
    }

    emseg::DecoderResult res = emseg::decoder_stack(c0, pyramid, layers, cfg);

    json trace;
    trace["seed"] = o.seed;
    trace["k"] = o.k;
    trace["levels"] = o.levels;
    trace["t"] = o.t;
    trace["dim"] = d;
    trace["center_delta"] = emseg::max_abs_diff(res.centers.centers, c0.centers);
    json norms = json::array();
    for (std::size_t r = 0; r < res.centers.k(); ++r) {
        double sq = 0.0;
        for (std::size_t c = 0; c < d; ++c) {
            sq += res.centers.centers(r, c) * res.centers.centers(r, c);
        }
        norms.push_back(std::sqrt(sq));
    }
    trace["final_center_norms"] = std::move(norms);

    json jlayers = json::array();
    for (std::size_t li = 0; li < res.traces.size(); ++li) {
        const emseg::LayerTrace& tr = res.traces[li];
        json jl;
        jl["level"] = li / 2;
        jl["layer_in_level"] = li % 2;
        jl["flops"] = tr.flop_count;
        json rounds = json::array();
        for (std::size_t r = 0; r < tr.soft_assignments.size(); ++r) {
            const Matrix& m = tr.soft_assignments[r];
            double ent_min = 0.0, ent_max = 0.0, ent_sum = 0.0, col_err = 0.0;
            for (std::size_t j = 0; j < m.cols(); ++j) {
                double ent = 0.0, sum = 0.0;
                for (std::size_t ki = 0; ki < m.rows(); ++ki) {
                    const double p = m(ki, j);
                    sum += p;
                    if (p > 0.0) ent -= p * std::log(p);
                }
                col_err = std::max(col_err, std::abs(sum - 1.0));
                ent_sum += ent;
                if (j == 0 || ent < ent_min) ent_min = ent;
                if (j == 0 || ent > ent_max) ent_max = ent;
            }
            json jr;
            jr["round"] = r;
            jr["entropy_mean"] = ent_sum / double(m.cols());
            jr["entropy_min"] = ent_min;
            jr["entropy_max"] = ent_max;
            jr["max_column_sum_error"] = col_err;
            rounds.push_back(std::move(jr));
        }
        jl["iterations"] = std::move(rounds);
        jlayers.push_back(std::move(jl));
    }
    trace["layers"] = std::move(jlayers);

    std::ofstream out(o.out, std::ios::trunc);
    if (!out) throw emseg::Error("cannot open " + o.out + " for writing");
    out << trace.dump(2) << "\n";
    if (!out) throw emseg::Error("short write to " + o.out);
    std::cout << trace.dump() << "\n";
    return 0;
}

int dispatch(Cli& cli) {
    if (cli.cluster->parsed()) return cmd_cluster(cli.c);
    if (cli.superpixel->parsed()) return cmd_superpixel(cli.s);
    if (cli.bench->parsed()) return cmd_bench(cli.b);
    if (cli.demo->parsed()) return cmd_demo(cli.d);
    throw UsageError("no command given");
}

int run(int argc, char** argv) {
    auto parse_or_exit = [](Cli& cli, int ac, char** av, int& code) {
        try {
            cli.app.parse(ac, av);
            return true;
        } catch (const CLI::CallForHelp& e) {
            code = cli.app.exit(e);  // prints help, exit 0
            return false;
        } catch (const CLI::ParseError& e) {
            cli.app.exit(e);
            code = 1;
            return false;
        }
    };

    Cli first;
    int code = 0;
    if (!parse_or_exit(first, argc, argv, code)) return code;
    CLI::App* sub = first.active();

    std::string config_path;
    if (first.cluster->parsed()) config_path = first.c.config;
    if (first.superpixel->parsed()) config_path = first.s.config;
    if (first.bench->parsed()) config_path = first.b.config;
    if (first.demo->parsed()) config_path = first.d.config;

    Cli* effective = &first;
    Cli second;
    std::vector<std::string> tokens;
    if (!config_path.empty()) {
        tokens = config_tokens(config_path, sub);
        if (!tokens.empty()) {
            // re-parse with config pairs injected ahead of the explicit flags
            std::vector<std::string> args;
            args.push_back(argv[0]);
            args.push_back(sub->get_name());
            for (const std::string& t : tokens) args.push_back(t);
            for (int i = 2; i < argc; ++i) args.push_back(argv[i]);
            std::vector<char*> ptrs;
            for (std::string& a : args) ptrs.push_back(a.data());
            if (!parse_or_exit(second, int(ptrs.size()), ptrs.data(), code)) return code;
            effective = &second;
        }
    }

    // environment seed is the weakest default: flag and config both beat it
    if (const char* env = std::getenv("EMSEG_SEED")) {
        CLI::App* esub = effective->active();
        CLI::Option* seed_opt = esub ? esub->get_option_no_throw("--seed") : nullptr;
        if (seed_opt != nullptr && seed_opt->count() == 0) {
            const std::uint64_t v = parse_u64(env, "EMSEG_SEED");
            if (effective->cluster->parsed()) effective->c.seed = v;
            if (effective->demo->parsed()) effective->d.seed = v;
        }
    }

    return dispatch(*effective);
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
