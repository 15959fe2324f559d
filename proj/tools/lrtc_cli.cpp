// lrtc: command-line front end for smart-meter tensor completion.
//
//   lrtc synth    --dims 31x48x114 --rank 3 --output full.csv
//   lrtc simulate --input full.csv --rate 0.3 --output masked.csv
//   lrtc complete --input masked.csv --output completed.csv
//   lrtc eval     --input masked.csv --completed completed.csv --truth masked.truth.csv
//   lrtc bench    --dims 30x48x50 --rates 0.1..0.9 --method cpd_lrtc,halrtc

#include <lrtc/lrtc.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace lrtc;
using nlohmann::json;

enum ExitCode : int { ok = 0, usage_error = 2, data_error = 3, numerical_error = 4 };

Shape parse_dims(const std::string &text) {
    Shape d;
    std::array<Index *, 3> slots{&d.i1, &d.i2, &d.i3};
    std::size_t pos = 0;
    for (int n = 0; n < 3; ++n) {
        const auto end = n < 2 ? text.find('x', pos) : text.size();
        if (end == std::string::npos)
            throw UsageError("--dims must look like I1xI2xI3, got '" + text + "'");
        const std::string part = text.substr(pos, end - pos);
        unsigned long long v   = 0;
        if (!detail::parse_number(std::string_view(part), v) || v == 0)
            throw UsageError("--dims must look like I1xI2xI3 with positive extents, got '" +
                             text + "'");
        *slots[n] = static_cast<Index>(v);
        pos       = end + 1;
    }
    return d;
}

double parse_real(std::string_view text, const char *flag) {
    double v = 0.0;
    if (!detail::parse_number(text, v))
        throw UsageError(std::string(flag) + ": '" + std::string(text) + "' is not a number");
    return v;
}

/// "0.1..0.9" (step 0.1), "0.1..0.9:0.2", or "0.1,0.5,0.9".
std::vector<double> parse_rates(const std::string &text) {
    std::vector<double> rates;
    const auto dots = text.find("..");
    if (dots == std::string::npos) {
        for (auto field : detail::split_commas(text))
            rates.push_back(parse_real(field, "--rates"));
        return rates;
    }
    const std::string rest = text.substr(dots + 2);
    const auto colon       = rest.find(':');
    const double lo        = parse_real(std::string_view(text).substr(0, dots), "--rates");
    const double hi   = parse_real(std::string_view(rest).substr(0, colon), "--rates");
    const double step = colon == std::string::npos
                            ? 0.1
                            : parse_real(std::string_view(rest).substr(colon + 1), "--rates");
    if (!(step > 0.0) || hi < lo)
        throw UsageError("--rates range must be increasing with a positive step");
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= count; ++i)
        rates.push_back(std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9);
    return rates;
}

std::array<double, 3> parse_alpha(const std::string &text) {
    const auto fields = detail::split_commas(text);
    if (fields.size() != 3)
        throw UsageError("--alpha needs three comma-separated weights");
    return {parse_real(fields[0], "--alpha"), parse_real(fields[1], "--alpha"),
            parse_real(fields[2], "--alpha")};
}

/// Writes through a temporary file so a failure never leaves a partial file.
template <class Writer>
void write_atomically(const std::string &path, Writer &&write) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw DataError("cannot write '" + path + "'");
        write(out);
        out.flush();
        if (!out)
            throw DataError("write to '" + path + "' failed");
    }
    std::filesystem::rename(tmp, path);
}

std::string truth_sidecar_path(const std::string &output) {
    const std::string suffix = ".csv";
    if (output.size() > suffix.size() &&
        output.compare(output.size() - suffix.size(), suffix.size(), suffix) == 0)
        return output.substr(0, output.size() - suffix.size()) + ".truth.csv";
    return output + ".truth.csv";
}

struct SolverFlags {
    std::optional<int> rank;
    std::string alpha;
    std::optional<double> lambda, mu0, rho, mu_max, epsilon;
    std::optional<int> max_iters;

    void attach(CLI::App &cmd) {
        cmd.add_option("--rank", rank, "CP rank bound R (default min(20, min dims))");
        cmd.add_option("--alpha", alpha, "Trace-norm weights a1,a2,a3 summing to 1");
        cmd.add_option("--lambda", lambda, "Fit weight lambda");
        cmd.add_option("--mu0", mu0, "Initial penalty (HaLRTC derives it from the data if unset)");
        cmd.add_option("--rho", rho, "Penalty growth factor (>= 1)");
        cmd.add_option("--mu-max", mu_max, "Penalty cap");
        cmd.add_option("--epsilon", epsilon, "Relative-change stopping tolerance");
        cmd.add_option("--max-iters", max_iters, "Iteration cap");
    }

    ImputeOptions options(std::uint64_t seed) const {
        ImputeOptions o;
        o.cpd.seed = seed;
        if (rank)
            o.cpd.rank = *rank;
        if (!alpha.empty())
            o.cpd.alpha = o.halrtc.alpha = parse_alpha(alpha);
        if (lambda)
            o.cpd.lambda = *lambda;
        if (mu0) {
            o.cpd.penalty.mu0 = o.halrtc.penalty.mu0 = *mu0;
            o.halrtc.auto_mu0 = false;
        }
        if (rho)
            o.cpd.penalty.rho = o.halrtc.penalty.rho = *rho;
        if (mu_max)
            o.cpd.penalty.mu_max = o.halrtc.penalty.mu_max = *mu_max;
        if (epsilon)
            o.cpd.epsilon = o.halrtc.epsilon = *epsilon;
        if (max_iters)
            o.cpd.max_iters = o.halrtc.max_iters = *max_iters;
        o.cpd.validate();
        o.halrtc.validate();
        return o;
    }
};

TensorDataset load_dataset(const std::string &path, const std::string &dims_text,
                           Layout layout) {
    const auto records = load_csv(path);
    const Shape dims   = dims_text.empty() ? infer_shape(records, layout) : parse_dims(dims_text);
    return build_tensor(records, layout, dims);
}

TensorDataset with_full_mask(TensorDataset ds, Tensor3 values) {
    ds.tensor = std::move(values);
    ds.mask   = Mask::full(ds.dims());
    return ds;
}

int run(int argc, char **argv) {
    CLI::App app{"Low-rank tensor completion for smart-meter measurement data"};
    app.require_subcommand(1);

    std::string input, output, dims_text, layout_text = "multi_user_single_measurement";
    std::uint64_t seed = 0;
    auto common = [&](CLI::App &cmd, bool need_input, bool need_output) {
        auto *in = cmd.add_option("--input", input, "Input CSV (day,slot,channel,value)");
        if (need_input)
            in->required()->check(CLI::ExistingFile);
        auto *out = cmd.add_option("--output", output, "Output CSV");
        if (need_output)
            out->required();
        cmd.add_option("--dims", dims_text, "Tensor shape I1xI2xI3 (inferred if omitted)");
        cmd.add_option("--layout", layout_text,
                       "multi_user_single_measurement | single_user_multi_measurement");
        cmd.add_option("--seed", seed, "Seed for every random choice");
    };

    // complete
    auto *complete_cmd = app.add_subcommand("complete", "Impute the missing entries of a CSV");
    common(*complete_cmd, true, true);
    SolverFlags complete_flags;
    complete_flags.attach(*complete_cmd);
    std::string method_text = "cpd_lrtc", report_path;
    bool no_prefill = false;
    complete_cmd->add_option("--method", method_text, "cpd_lrtc | halrtc | mean | interp");
    complete_cmd->add_option("--report", report_path, "Also write the JSON report here");
    complete_cmd->add_flag("--no-prefill", no_prefill,
                           "Skip the P = U I cos(phi) pre-fill for multi-measurement data");

    // simulate
    auto *simulate_cmd = app.add_subcommand("simulate", "Hide a random fraction of entries");
    common(*simulate_cmd, true, true);
    double rate = 0.0;
    std::string truth_path;
    simulate_cmd->add_option("--rate", rate, "Missing rate in [0, 1)")->required();
    simulate_cmd->add_option("--truth", truth_path,
                             "Ground-truth sidecar (default <output>.truth.csv)");

    // synth
    auto *synth_cmd = app.add_subcommand("synth", "Generate a synthetic load tensor");
    common(*synth_cmd, false, true);
    int synth_rank     = 3;
    double synth_noise = 0.0;
    bool periodic      = false;
    auto synth_flags   = [&](CLI::App &cmd, const std::string &rank_names) {
        cmd.add_option(rank_names, synth_rank, "CP rank of the synthetic signal");
        cmd.add_option("--noise", synth_noise, "Noise std relative to signal RMS");
        cmd.add_flag("--periodic", periodic, "Smooth daily load profiles on the slot axis");
    };
    synth_flags(*synth_cmd, "--rank,--true-rank");

    // bench
    auto *bench_cmd = app.add_subcommand("bench", "Sweep missing rates over several methods");
    common(*bench_cmd, false, false);
    SolverFlags bench_flags;
    bench_flags.attach(*bench_cmd);
    synth_flags(*bench_cmd, "--true-rank");
    std::string rates_text = "0.1..0.9", bench_methods = "cpd_lrtc,halrtc",
                scope_text = "missing_only";
    bench_cmd->add_option("--rates", rates_text, "e.g. 0.1..0.9, 0.1..0.9:0.2 or 0.1,0.5");
    bench_cmd->add_option("--method", bench_methods, "Comma-separated methods");
    bench_cmd->add_option("--scope", scope_text, "missing_only | whole_tensor");
    bench_cmd->add_flag("--no-prefill", no_prefill, "Skip the power-identity pre-fill");

    // eval
    auto *eval_cmd = app.add_subcommand("eval", "Score a completion against ground truth");
    common(*eval_cmd, true, false);
    std::string completed_path, eval_truth;
    eval_cmd->add_option("--completed", completed_path, "Completed CSV")
        ->required()
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--truth", eval_truth, "Ground-truth CSV")
        ->required()
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--scope", scope_text, "missing_only | whole_tensor");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage_error;
    }

    const Layout layout = parse_layout(layout_text);

    if (complete_cmd->parsed()) {
        const Method method    = parse_method(method_text);
        ImputeOptions options  = complete_flags.options(seed);
        options.prefill        = !no_prefill;
        const TensorDataset ds = load_dataset(input, dims_text, layout);
        if (ds.mask.count_observed() == 0)
            throw UsageError("input has no observed entries");
        const ImputeResult result = impute(ds, method, options);
        const auto &rep           = result.report;

        json report = {{"method", to_string(method)},
                       {"dims", ds.dims().to_string()},
                       {"layout", to_string(layout)},
                       {"observed", ds.mask.count_observed()},
                       {"missing", ds.mask.count_missing()},
                       {"iterations", rep.iterations},
                       {"converged", rep.converged},
                       {"wall_time_s", rep.wall_time},
                       {"residual_history", rep.residual_history}};
        if (method == Method::cpd_lrtc)
            report["rank"] = options.cpd.resolved_rank(ds.dims());
        if (result.prefill)
            report["prefill"] = {{"filled", result.prefill->filled},
                                 {"skipped_small_divisor", result.prefill->skipped_small_divisor},
                                 {"skipped_inconsistent", result.prefill->skipped_inconsistent},
                                 {"treated_as_observed", true}};

        const TensorDataset out = with_full_mask(ds, rep.completed);
        write_atomically(output, [&](std::ostream &o) { write_csv(out, o); });
        if (!report_path.empty())
            write_atomically(report_path, [&](std::ostream &o) { o << report.dump(2) << '\n'; });
        std::cout << report.dump(2) << '\n';
        return ok;
    }

    if (simulate_cmd->parsed()) {
        const TensorDataset ds = load_dataset(input, dims_text, layout);
        const TensorDataset masked = simulate_missing(ds, rate, seed);
        const std::string sidecar  = truth_path.empty() ? truth_sidecar_path(output) : truth_path;
        write_atomically(output, [&](std::ostream &o) { write_csv(masked, o); });
        write_atomically(sidecar, [&](std::ostream &o) { write_csv(ds, o); });
        std::cout << "hid " << masked.mask.count_missing() << " of " << ds.tensor.size()
                  << " entries; truth in " << sidecar << '\n';
        return ok;
    }

    if (synth_cmd->parsed()) {
        const Shape dims = dims_text.empty() ? SynthSpec{}.dims : parse_dims(dims_text);
        const SynthSpec spec{dims, synth_rank, synth_noise, periodic, layout};
        const SynthResult s = synth_load_tensor(spec, seed);
        write_atomically(output, [&](std::ostream &o) { write_csv(s.dataset, o); });
        std::cout << "wrote " << dims.size() << " entries (" << dims.to_string() << ") to "
                  << output << '\n';
        return ok;
    }

    if (bench_cmd->parsed()) {
        BenchConfig cfg;
        cfg.options         = bench_flags.options(seed);
        cfg.options.prefill = !no_prefill;
        cfg.scope           = parse_rse_scope(scope_text);
        const auto rates    = parse_rates(rates_text);
        std::vector<Method> methods;
        for (auto m : detail::split_commas(bench_methods))
            methods.push_back(parse_method(m));
        TensorDataset ds;
        if (!input.empty()) {
            ds = load_dataset(input, dims_text, layout);
        } else {
            const Shape dims = dims_text.empty() ? Shape{30, 48, 50} : parse_dims(dims_text);
            ds = synth_load_tensor(SynthSpec{dims, synth_rank, synth_noise, periodic, layout},
                                   derive_seed(seed, "bench/synth"))
                     .dataset;
        }
        const auto results = run_benchmark(ds, rates, methods, cfg, seed);
        if (!output.empty())
            write_atomically(output, [&](std::ostream &o) { write_bench_csv(results, o); });
        else
            write_bench_csv(results, std::cout);
        std::cout << '\n' << format_bench_table(results, cfg.scope);
        return ok;
    }

    if (eval_cmd->parsed()) {
        const RseScope scope      = parse_rse_scope(scope_text);
        const TensorDataset masked    = load_dataset(input, dims_text, layout);
        const std::string dims_used   = masked.dims().to_string();
        const TensorDataset completed = load_dataset(completed_path, dims_used, layout);
        const TensorDataset truth     = load_dataset(eval_truth, dims_used, layout);
        if (completed.mask.count_missing() != 0)
            throw DataError(completed_path + ": completed file still has missing entries");
        if (truth.mask.count_missing() != 0)
            throw DataError(eval_truth + ": truth file has missing entries");
        const double value = rse(completed.tensor, truth.tensor, masked.mask, scope);
        std::cout << json{{"rse_percent", value},
                          {"scope", to_string(scope)},
                          {"missing", masked.mask.count_missing()}}
                         .dump(2)
                  << '\n';
        return ok;
    }
    return usage_error;
}

} // namespace

int main(int argc, char **argv) {
    try {
        return run(argc, argv);
    } catch (const lrtc::UsageError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return usage_error;
    } catch (const lrtc::DataError &e) {
        std::cerr << "data error: " << e.what() << '\n';
        return data_error;
    } catch (const lrtc::MetricError &e) {
        std::cerr << "metric error: " << e.what() << '\n';
        return data_error;
    } catch (const lrtc::NumericalError &e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return numerical_error;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
