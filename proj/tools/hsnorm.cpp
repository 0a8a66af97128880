/*
 Copyright 2026 The hsnorm Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <CLI11.hpp>

#include "hsn/cli.hpp"

int main(int argc, char** argv) {
    hsn::cli::RunConfig cfg;
    CLI::App app{"Hardy-Schatten norms and covariance-analytic costs of linear stochastic systems"};
    app.require_subcommand(1);

    const auto add_system = [&](CLI::App* sub, bool many) {
        auto* opt = sub->add_option("--system", cfg.systems, "system file (JSON)")->required();
        if (!many) opt->expected(1);
    };
    const auto add_order = [&](CLI::App* sub) {
        sub->add_option("--max-order", cfg.max_order, "highest order k")->capture_default_str();
    };
    const auto add_output = [&](CLI::App* sub) { sub->add_option("--output", cfg.output, "write results to this file"); };
    const auto add_tolerances = [&](CLI::App* sub) {
        sub->add_option("--hinf-rel-tol", cfg.settings.hinf_rel_tol, "relative H-infinity bracket width")
            ->capture_default_str();
        sub->add_option("--quadrature-rel-tol", cfg.settings.quadrature_rel_tol, "adaptive quadrature target")
            ->capture_default_str();
    };

    auto* norms = app.add_subcommand("norms", "Hardy-Schatten norms by each method, CSV with pairwise gaps");
    add_system(norms, false);
    add_order(norms);
    norms->add_option("--method", cfg.method, "wick | riccati | quadrature | all")->capture_default_str();
    add_output(norms);
    add_tolerances(norms);

    auto* cost = app.add_subcommand("cost", "cost J_phi by truncated series and by quadrature");
    add_system(cost, false);
    add_order(cost);
    cost->add_option("--shape", cfg.shape, "risk:THETA | power:K | coeffs:P1,P2,... | kl | quadratic")
        ->capture_default_str();
    cost->add_option("--method", cfg.method, "norms used by the series")->capture_default_str();
    add_output(cost);
    add_tolerances(cost);

    auto* risk = app.add_subcommand("risk", "risk-sensitive cost by ARE, series and quadrature");
    add_system(risk, false);
    add_order(risk);
    risk->add_option("--theta", cfg.theta, "theta, or X/hinf2 for X/|F|_inf^2")->capture_default_str();
    add_output(risk);
    add_tolerances(risk);

    auto* bound = app.add_subcommand("bound", "worst-case output variance bound");
    add_system(bound, false);
    std::string bound_shape = "kl";
    bound->add_option("--shape", bound_shape, "kl | quadratic")->capture_default_str();
    bound->add_option("--budget", cfg.budget, "uncertainty budget d >= 0")->capture_default_str();
    add_output(bound);
    add_tolerances(bound);

    auto* simulate = app.add_subcommand("simulate", "Monte-Carlo output energy cumulant rates (k <= 3)");
    add_system(simulate, false);
    add_order(simulate);
    simulate->add_option("--horizon", cfg.horizon, "T")->capture_default_str();
    simulate->add_option("--step", cfg.step, "h")->capture_default_str();
    simulate->add_option("--paths", cfg.paths, "number of paths")->capture_default_str();
    simulate->add_option("--seed", cfg.seed, "master seed")->capture_default_str();
    simulate->add_option("--output", cfg.output, "per-path energy samples (CSV)");

    auto* verify = app.add_subcommand("verify", "invariant suite; exit 0 iff every check passes");
    add_system(verify, true);
    add_order(verify);
    add_tolerances(verify);

    auto* generate = app.add_subcommand("generate", "random stable system file");
    generate->add_option("--states", cfg.states)->capture_default_str();
    generate->add_option("--inputs", cfg.inputs)->capture_default_str();
    generate->add_option("--outputs", cfg.outputs)->capture_default_str();
    generate->add_option("--seed", cfg.seed)->capture_default_str();
    add_output(generate);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : hsn::cli::input_error;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    if (cfg.command == "bound") cfg.shape = bound_shape;
    return hsn::cli::run(cfg);
}
