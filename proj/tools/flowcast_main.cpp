// flowcast: data generation, flow-matching training, perturbed-ensemble
// forecasting, metrics, and integration benchmarks from one binary.
//
// Exit codes: 0 success, 1 numerical failure, 2 usage/IO error.

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "flowcast/baseline.hpp"
#include "flowcast/dynamics.hpp"
#include "flowcast/errors.hpp"
#include "flowcast/flow.hpp"
#include "flowcast/integrate.hpp"
#include "flowcast/io.hpp"
#include "flowcast/kernels.hpp"
#include "flowcast/metrics.hpp"
#include "flowcast/perturb.hpp"

namespace {

using namespace flowcast;

std::vector<double> parse_doubles(const std::string& csv) {
    std::vector<double> out;
    std::istringstream in(csv);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(std::stod(item));
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& csv) {
    std::vector<std::size_t> out;
    std::istringstream in(csv);
    std::string item;
    while (std::getline(in, item, ','))
        if (!item.empty()) out.push_back(std::stoull(item));
    return out;
}

std::uint64_t env_seed_fallback() {
    if (const char* env = std::getenv("FLOWCAST_SEED")) return std::stoull(env);
    return 0;
}

void require(bool ok, const std::string& what) {
    if (!ok) throw UsageError(what);
}

/// "key = value" lines; keys are long option names of the active
/// subcommand. Unknown keys are rejected; command-line flags win.
void apply_config(CLI::App* sub, const std::string& path) {
    std::istringstream in(io::read_file(path));
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) continue;
        CLI::Option* opt = sub->get_option_no_throw("--" + key);
        if (!opt)
            throw UsageError("config key '" + key + "' is not an option of '" +
                             sub->get_name() + "'");
        if (opt->count() > 0) continue;  // flags override the file
        opt->add_result(opt->get_expected_min() == 0 && value.empty() ? "true" : value);
        opt->run_callback();
    }
}

// --------------------------------------------------------------------------

struct GenDataArgs {
    std::string generator;
    std::size_t n = 1000;
    double horizon = 200.0;
    std::uint64_t seed = env_seed_fallback();
    std::string mean = "0.1,0.3";
    double stddev = 0.05;
    double lo = 0.0, hi = 1.0;
    std::string grid = "16x16";
    double jitter = 0.5;
    double dt = 1e-3;
    std::string out;
    std::string csv;
};

int run_gen_data(const GenDataArgs& a) {
    require(!a.out.empty(), "gen-data needs --out");
    dynamics::Dataset ds;
    if (a.generator == "pp-gaussian") {
        ds = dynamics::gen_pp_dataset(
            a.n, a.horizon,
            dynamics::InitSampler::gaussian(parse_doubles(a.mean), a.stddev), {},
            a.seed, a.dt);
    } else if (a.generator == "pp-uniform-y2") {
        ds = dynamics::gen_pp_dataset(
            a.n, a.horizon, dynamics::InitSampler::fixed_y1_uniform_y2(a.lo, a.hi),
            {}, a.seed, a.dt);
    } else if (a.generator == "blob") {
        const auto x = a.grid.find('x');
        require(x != std::string::npos, "--grid must look like HxW");
        ds = dynamics::gen_blob_dataset(a.n, std::stoul(a.grid.substr(0, x)),
                                        std::stoul(a.grid.substr(x + 1)), a.jitter,
                                        a.seed);
    } else {
        throw UsageError("unknown generator '" + a.generator +
                         "' (use pp-gaussian, pp-uniform-y2 or blob)");
    }
    io::save_dataset(a.out, ds);
    if (!a.csv.empty()) io::export_dataset_csv(a.csv, ds);

    std::cout << "wrote " << a.out << ": n=" << ds.count() << " shape="
              << ds.shape.str() << " horizon=" << ds.horizon << "\n";
    if (ds.count() > 0) {
        std::cout << "pooled q0 mean/std: " << dynamics::pooled_mean(ds, false)
                  << " / " << dynamics::pooled_std(ds, false) << "\n"
                  << "pooled qT mean/std: " << dynamics::pooled_mean(ds, true)
                  << " / " << dynamics::pooled_std(ds, true) << "\n";
    } else {
        std::cout << "warning: dataset is empty\n";
    }
    return 0;
}

struct TrainArgs {
    std::string mode = "forecast";
    std::string data;
    std::string out;
    std::string log;
    std::string marginal = "q0";
    double lr = 1e-4;
    std::size_t batch = 64;
    std::size_t epochs = 200;
    std::uint64_t seed = env_seed_fallback();
    std::string hidden = "128,128,128";
    std::string activation = "tanh";
};

int run_train(const TrainArgs& a) {
    require(!a.data.empty(), "train needs --data");
    require(!a.out.empty(), "train needs --out");
    const auto ds = io::load_dataset(a.data);
    flow::TrainConfig cfg;
    cfg.lr = a.lr;
    cfg.batch_size = a.batch;
    cfg.epochs = a.epochs;
    cfg.seed = a.seed;
    cfg.hidden = parse_sizes(a.hidden);
    cfg.activation = nn::activation_from_name(a.activation);

    flow::TrainResult res;
    if (a.mode == "forecast") {
        res = flow::train_forecast_flow(ds, cfg);
    } else if (a.mode == "gaussify") {
        std::vector<std::vector<double>> states;
        if (a.marginal == "q0") {
            states = ds.marginal(false);
        } else if (a.marginal == "qT") {
            states = ds.marginal(true);
        } else if (a.marginal == "both") {
            states = ds.marginal(false);
            const auto t = ds.marginal(true);
            states.insert(states.end(), t.begin(), t.end());
        } else {
            throw UsageError("--marginal must be q0, qT or both");
        }
        res = flow::train_gaussify_flow(states, ds.shape, cfg);
    } else {
        throw UsageError("--mode must be forecast or gaussify");
    }

    io::save_checkpoint(a.out, flow::to_checkpoint(res.field));
    std::ostringstream log;
    log << "epoch,mean_loss\n";
    for (std::size_t e = 0; e < res.epoch_loss.size(); ++e)
        log << (e + 1) << "," << res.epoch_loss[e] << "\n";
    io::write_file_atomic(a.log.empty() ? a.out + ".log" : a.log, log.str());

    std::cout << "wrote " << a.out << " (kernels=" << kernels::active_name()
              << "), final loss " << res.epoch_loss.back() << "\n";
    return 0;
}

struct ForecastArgs {
    std::string model;
    std::string ensemble;
    std::string state;
    std::string from_data;
    std::string side = "q0";
    bool do_perturb = false;
    std::string gaussify;
    double sigma = 0.2;
    std::string family = "normal";
    std::size_t members = 100;
    std::size_t steps = integrate::kDefaultSteps;
    std::uint64_t seed = env_seed_fallback();
    std::string out;
    std::string csv;
    std::string svg;
};

Ensemble input_ensemble(const ForecastArgs& a, const Shape& want_shape) {
    if (!a.ensemble.empty()) return io::load_ensemble(a.ensemble);
    Ensemble e;
    if (!a.state.empty()) {
        e.shape = want_shape;
        e.members = {parse_doubles(a.state)};
        e.meta.source = "state-flag";
        if (e.members[0].size() != want_shape.size())
            throw ShapeError("--state has " + std::to_string(e.members[0].size()) +
                             " entries, model expects " +
                             std::to_string(want_shape.size()));
        return e;
    }
    if (!a.from_data.empty()) {
        const auto ds = io::load_dataset(a.from_data);
        e.shape = ds.shape;
        e.members = ds.marginal(a.side == "qT");
        e.meta.source = "dataset-" + a.side;
        return e;
    }
    throw UsageError("need one of --ensemble, --state or --from-data");
}

int run_forecast(const ForecastArgs& a) {
    require(!a.model.empty(), "forecast needs --model");
    require(!a.out.empty(), "forecast needs --out");
    const auto field = flow::field_from_checkpoint(io::load_checkpoint(a.model));
    if (field.kind != flow::FieldKind::forecast)
        throw UsageError("--model must be a forecast checkpoint (kind FRCT)");

    Ensemble e0;
    if (a.do_perturb) {
        require(!a.gaussify.empty(), "--perturb needs --gaussify");
        const auto gfield =
            flow::field_from_checkpoint(io::load_checkpoint(a.gaussify));
        if (gfield.kind != flow::FieldKind::gaussify)
            throw UsageError("--gaussify must be a gaussify checkpoint (kind GSSY)");
        Ensemble seed_ens = input_ensemble(a, Shape::vec(field.state_dim()));
        require(seed_ens.size() == 1, "--perturb starts from a single state");
        perturb::NoiseSpec spec{perturb::family_from_name(a.family), a.sigma, a.seed};
        e0 = perturb::gen_perturbed_ensemble(gfield, seed_ens.members[0], spec,
                                             a.members, a.steps, seed_ens.shape);
    } else {
        e0 = input_ensemble(a, Shape::vec(field.state_dim()));
    }

    const Ensemble out = integrate::propagate_ensemble(field, e0, a.steps);
    io::save_ensemble(a.out, out);
    if (!a.csv.empty()) {
        if (out.shape.is_grid()) {
            const auto mean = metrics::ensemble_mean_state(out);
            const auto sd = metrics::ensemble_sd_state(out);
            std::ostringstream csv;
            csv << "pixel,mean,sd\n";
            for (std::size_t i = 0; i < mean.size(); ++i)
                csv << i << "," << mean[i] << "," << sd[i] << "\n";
            io::write_file_atomic(a.csv, csv.str());
        } else {
            io::export_ensemble_csv(a.csv, out);
        }
    }
    if (!a.svg.empty() && out.dim() == 2) {
        io::ScatterSeries in_pts{"initial", "#888888", {}};
        io::ScatterSeries out_pts{"forecast", "#1f77b4", {}};
        for (const auto& m : e0.members) in_pts.points.push_back({m[0], m[1]});
        for (const auto& m : out.members) out_pts.points.push_back({m[0], m[1]});
        io::write_scatter_svg(a.svg, {in_pts, out_pts});
    }
    std::cout << "wrote " << a.out << ": " << out.size() << " members, steps="
              << a.steps << "\n";
    return 0;
}

struct PerturbArgs {
    std::string gaussify;
    std::string state;
    std::string from_data;
    std::size_t index = 0;
    double sigma = 0.2;
    std::string family = "normal";
    std::size_t members = 100;
    std::size_t steps = integrate::kDefaultSteps;
    std::uint64_t seed = env_seed_fallback();
    std::string out;
    std::string csv;
};

int run_perturb(const PerturbArgs& a) {
    require(!a.gaussify.empty(), "perturb needs --gaussify");
    require(!a.out.empty(), "perturb needs --out");
    const auto field = flow::field_from_checkpoint(io::load_checkpoint(a.gaussify));
    if (field.kind != flow::FieldKind::gaussify)
        throw UsageError("--gaussify must be a gaussify checkpoint (kind GSSY)");

    std::vector<double> q0;
    Shape shape = Shape::vec(field.state_dim());
    if (!a.state.empty()) {
        q0 = parse_doubles(a.state);
    } else if (!a.from_data.empty()) {
        const auto ds = io::load_dataset(a.from_data);
        if (a.index >= ds.count())
            throw UsageError("--index " + std::to_string(a.index) +
                             " out of range (dataset has " +
                             std::to_string(ds.count()) + " pairs)");
        q0 = ds.pairs[a.index].q0;
        shape = ds.shape;
    } else {
        throw UsageError("need --state or --from-data");
    }

    perturb::NoiseSpec spec{perturb::family_from_name(a.family), a.sigma, a.seed};
    const Ensemble e =
        perturb::gen_perturbed_ensemble(field, q0, spec, a.members, a.steps, shape);
    io::save_ensemble(a.out, e);
    if (!a.csv.empty()) io::export_ensemble_csv(a.csv, e);
    std::cout << "wrote " << a.out << ": " << e.size() << " members, family="
              << a.family << " sigma=" << a.sigma << "\n";
    return 0;
}

struct MetricsArgs {
    std::string pred;
    std::string truth;
    std::string out;
    double range = 1.0;
};

Ensemble load_spec(const std::string& spec) {
    const auto at = spec.rfind('@');
    if (at != std::string::npos) {
        const std::string side = spec.substr(at + 1);
        if (side != "q0" && side != "qT")
            throw UsageError("dataset side must be @q0 or @qT: " + spec);
        const auto ds = io::load_dataset(spec.substr(0, at));
        Ensemble e;
        e.shape = ds.shape;
        e.members = ds.marginal(side == "qT");
        e.meta.source = "dataset-" + side;
        e.meta.horizon = ds.horizon;
        return e;
    }
    return io::load_ensemble(spec);
}

int run_metrics(const MetricsArgs& a) {
    require(!a.pred.empty() && !a.truth.empty(), "metrics needs --pred and --truth");
    const auto pred = load_spec(a.pred);
    const auto truth = load_spec(a.truth);
    const auto report = metrics::compare(pred, truth, a.range);
    if (!a.out.empty())
        io::write_file_atomic(a.out, metrics::report_csv_header() + "\n" +
                                         metrics::report_csv_row(report) + "\n");
    std::cout << metrics::report_csv_header() << "\n"
              << metrics::report_csv_row(report) << "\n"
              << metrics::report_text(report);
    return 0;
}

int run_bench(const std::string& out) {
    std::ostringstream csv;
    csv << integrate::cost_csv_header() << "\n";
    for (std::size_t n : {1, 10, 100, 1000})
        csv << integrate::cost_csv_row(integrate::bench_integration("ode_euler", n))
            << "\n";
    for (std::size_t n : {10, 100, 1000})
        csv << integrate::cost_csv_row(
                   integrate::bench_integration("sde_euler_maruyama", n))
            << "\n";
    if (!out.empty()) io::write_file_atomic(out, csv.str());
    std::cout << csv.str();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flow-matching forecaster for dynamical systems"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "key = value config file; flags override");

    GenDataArgs gd;
    auto* gen = app.add_subcommand("gen-data", "generate a paired dataset");
    gen->add_option("generator", gd.generator, "pp-gaussian | pp-uniform-y2 | blob")
        ->required();
    gen->add_option("--n", gd.n, "sample count");
    gen->add_option("--horizon", gd.horizon, "prediction horizon T");
    gen->add_option("--seed", gd.seed, "rng seed");
    gen->add_option("--mean", gd.mean, "gaussian sampler mean, comma separated");
    gen->add_option("--std", gd.stddev, "gaussian sampler stddev");
    gen->add_option("--lo", gd.lo, "uniform y2 lower bound");
    gen->add_option("--hi", gd.hi, "uniform y2 upper bound");
    gen->add_option("--grid", gd.grid, "blob grid HxW");
    gen->add_option("--jitter", gd.jitter, "blob velocity jitter");
    gen->add_option("--dt", gd.dt, "oracle integrator step");
    gen->add_option("--out", gd.out, "output dataset path");
    gen->add_option("--csv", gd.csv, "also export pairs as CSV");

    TrainArgs tr;
    auto* train = app.add_subcommand("train", "train a velocity field");
    train->add_option("--mode", tr.mode, "forecast | gaussify");
    train->add_option("--data", tr.data, "dataset path");
    train->add_option("--out", tr.out, "checkpoint path");
    train->add_option("--log", tr.log, "loss log path (default <out>.log)");
    train->add_option("--marginal", tr.marginal, "gaussify marginal: q0 | qT | both");
    train->add_option("--lr", tr.lr, "learning rate");
    train->add_option("--batch", tr.batch, "batch size");
    train->add_option("--epochs", tr.epochs, "training epochs");
    train->add_option("--seed", tr.seed, "rng seed");
    train->add_option("--hidden", tr.hidden, "hidden widths, comma separated");
    train->add_option("--activation", tr.activation, "tanh | silu");

    ForecastArgs fc;
    auto* fore = app.add_subcommand("forecast", "propagate states through a flow");
    fore->add_option("--model", fc.model, "forecast checkpoint");
    fore->add_option("--ensemble", fc.ensemble, "input ensemble file");
    fore->add_option("--state", fc.state, "single state, comma separated");
    fore->add_option("--from-data", fc.from_data, "dataset whose side to propagate");
    fore->add_option("--side", fc.side, "dataset side: q0 | qT");
    fore->add_flag("--perturb", fc.do_perturb, "grow a perturbed ensemble first");
    fore->add_option("--gaussify", fc.gaussify, "gaussify checkpoint for --perturb");
    fore->add_option("--sigma", fc.sigma, "perturbation amplitude");
    fore->add_option("--family", fc.family, "normal | uniform | constant");
    fore->add_option("--members", fc.members, "ensemble size M");
    fore->add_option("--steps", fc.steps, "Euler steps N");
    fore->add_option("--seed", fc.seed, "rng seed");
    fore->add_option("--out", fc.out, "output ensemble path");
    fore->add_option("--csv", fc.csv, "scatter CSV (vectors) or mean/sd grid CSV");
    fore->add_option("--svg", fc.svg, "scatter SVG for 2-D states");

    PerturbArgs pt;
    auto* pert = app.add_subcommand("perturb", "generate a perturbed ensemble");
    pert->add_option("--gaussify", pt.gaussify, "gaussify checkpoint");
    pert->add_option("--state", pt.state, "source state, comma separated");
    pert->add_option("--from-data", pt.from_data, "dataset to take the source from");
    pert->add_option("--index", pt.index, "pair index within --from-data");
    pert->add_option("--sigma", pt.sigma, "perturbation amplitude");
    pert->add_option("--family", pt.family, "normal | uniform | constant");
    pert->add_option("--members", pt.members, "ensemble size M");
    pert->add_option("--steps", pt.steps, "Euler steps N");
    pert->add_option("--seed", pt.seed, "rng seed");
    pert->add_option("--out", pt.out, "output ensemble path");
    pert->add_option("--csv", pt.csv, "also export members as CSV");

    MetricsArgs mt;
    auto* met = app.add_subcommand("metrics", "compare two ensembles");
    met->add_option("--pred", mt.pred, "ensemble file, or dataset@q0 / dataset@qT");
    met->add_option("--truth", mt.truth, "ensemble file, or dataset@q0 / dataset@qT");
    met->add_option("--out", mt.out, "write the CSV report here");
    met->add_option("--range", mt.range, "SSIM dynamic range L");

    std::string bench_out;
    auto* bench = app.add_subcommand("bench", "ODE/SDE cost table");
    bench->add_option("--out", bench_out, "write the CSV table here");

    try {
        app.parse(argc, argv);
        if (!config_path.empty())
            for (auto* sub : {gen, train, fore, pert, met, bench})
                if (sub->parsed()) apply_config(sub, config_path);

        if (gen->parsed()) return run_gen_data(gd);
        if (train->parsed()) return run_train(tr);
        if (fore->parsed()) return run_forecast(fc);
        if (pert->parsed()) return run_perturb(pt);
        if (met->parsed()) return run_metrics(mt);
        if (bench->parsed()) return run_bench(bench_out);
        std::cerr << "no subcommand given\n";
        return 2;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const DivergenceError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ShapeError& e) {
        std::cerr << "shape error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
