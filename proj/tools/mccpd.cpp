// mccpd: canonical decomposition of function-defined tensors by Monte-Carlo
// hyperplane discrepancy minimisation.

#include "mccpd/runner.hpp"
#include "mccpd/selftest.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

struct Overrides {
    std::string config_path;
    std::map<std::string, std::string> values;
};

void add_run_options(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config_path, "key=value configuration file");
    for (const char* key : mccpd::config_keys()) {
        const std::string name = key;
        if (name == "method" && cmd->get_name() == "compare") continue;
        cmd->add_option("--" + name, o.values[name], "override config key '" + name + "'");
    }
}

mccpd::RunSpec resolve(const Overrides& o) {
    mccpd::RunSpec spec;
    if (!o.config_path.empty()) mccpd::apply_key_values(spec, mccpd::load_key_values(o.config_path));
    mccpd::KeyValues given;
    for (const auto& [key, value] : o.values) {
        if (!value.empty()) given[key] = value;
    }
    mccpd::apply_key_values(spec, given);
    mccpd::validate(spec);
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monte-Carlo canonical tensor decomposition"};
    app.require_subcommand(1);

    Overrides decompose_o;
    auto* decompose = app.add_subcommand("decompose", "fit a CP model and log convergence");
    add_run_options(decompose, decompose_o);

    Overrides compare_o;
    std::string merged_csv = "compare.csv";
    auto* compare = app.add_subcommand("compare", "run newton, steepest-descent and als from one start");
    add_run_options(compare, compare_o);
    compare->add_option("--out", merged_csv, "merged convergence CSV");

    Overrides slice_o;
    mccpd::SliceRequest slice_req;
    std::size_t plane1 = 1;
    std::size_t plane2 = 2;
    std::size_t center = 0;
    auto* slice = app.add_subcommand("slice", "export oracle and residual over a coordinate plane");
    add_run_options(slice, slice_o);
    slice->add_option("--cores", slice_req.cores_path, "CPD1 cores file")->required();
    slice->add_option("--c1", plane1, "first plane coordinate (1-based)");
    slice->add_option("--c2", plane2, "second plane coordinate (1-based)");
    slice->add_option("--center", center, "node for the other coordinates (default ceil(N/2))");
    slice->add_option("--prefix", slice_req.out_prefix, "output prefix");

    std::string eval_cores;
    std::vector<long long> eval_index;
    auto* eval = app.add_subcommand("eval", "evaluate a saved model at a 1-based multi-index");
    eval->add_option("cores", eval_cores, "CPD1 cores file")->required();
    eval->add_option("index", eval_index, "node per coordinate")->required();

    mccpd::SelftestOptions selftest_opt;
    auto* selftest = app.add_subcommand("selftest", "run the small-instance property battery");
    selftest->add_option("--seed", selftest_opt.seed, "seed for the battery");
    selftest->add_flag("--corrupt-gradient-sign", selftest_opt.corrupt_gradient_sign)
        ->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? mccpd::kExitOk : mccpd::kExitError;
    }

    try {
        if (*decompose) return mccpd::cmd_decompose(resolve(decompose_o), std::cout, std::cerr);
        if (*compare) return mccpd::cmd_compare(resolve(compare_o), merged_csv, std::cout, std::cerr);
        if (*slice) {
            if (plane1 < 1 || plane2 < 1) throw mccpd::ConfigError("plane coordinates are 1-based");
            slice_req.c1 = plane1 - 1;
            slice_req.c2 = plane2 - 1;
            if (center) slice_req.center = center;
            return mccpd::cmd_slice(resolve(slice_o), slice_req, std::cout, std::cerr);
        }
        if (*eval) return mccpd::cmd_eval(eval_cores, eval_index, std::cout, std::cerr);
        if (*selftest) return mccpd::cmd_selftest(selftest_opt, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return mccpd::kExitError;
    }
    return mccpd::kExitError;
}
