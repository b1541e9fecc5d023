// fbar-lab: command-line laboratory for rotation arithmetic, trigonometric
// roof constructions, special-flow time-one maps, fbar metrics, Rokhlin
// towers and mixing diagnostics.  All randomized subcommands are
// deterministic per seed: identical seed and config give byte-identical
// outputs.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fbarlab/serialize.hpp"

using namespace fbarlab;

namespace {

struct GlobalOpts {
    std::string config_path;
    std::string out_dir = ".";
    uint64_t seed = 0;
    int precision_bits = 256;
    long long samples = 100000;

    json config; // parsed --config contents (optional)
};

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void apply_config(GlobalOpts& g) {
    if (g.config_path.empty()) return;
    g.config = json::parse(read_text_file(g.config_path));
    if (g.config.contains("seed")) g.seed = g.config["seed"].get<uint64_t>();
    if (g.config.contains("samples"))
        g.samples = g.config["samples"].get<long long>();
    if (g.config.contains("precision_bits"))
        g.precision_bits = g.config["precision_bits"].get<int>();
    if (g.config.contains("out")) g.out_dir = g.config["out"].get<std::string>();
}

std::string out_path(const GlobalOpts& g, const std::string& name) {
    std::filesystem::create_directories(g.out_dir);
    return (std::filesystem::path(g.out_dir) / name).string();
}

void emit_json(const GlobalOpts& g, const std::string& name, json j,
               uint64_t seed_used) {
    j["seed"] = seed_used;
    write_text_file(out_path(g, name), j.dump(2) + "\n");
}

RotationSpec load_rotation(const GlobalOpts& g, const std::string& path,
                           const std::vector<long long>& pq_x,
                           const std::vector<long long>& pq_y) {
    if (!path.empty())
        return rotation_from_json(json::parse(read_text_file(path)));
    if (!pq_x.empty() && !pq_y.empty())
        return build_rotation(pq_x, pq_y, g.precision_bits);
    if (g.config.contains("rotation"))
        return rotation_from_json(g.config["rotation"]);
    if (g.config.contains("rotation_path"))
        return rotation_from_json(
            json::parse(read_text_file(g.config["rotation_path"])));
    throw InvalidInput("no rotation spec: pass --rotation, --pq-x/--pq-y or a "
                       "config with a rotation entry");
}

RoofFunction load_roof(const GlobalOpts& g, const std::string& path) {
    if (!path.empty())
        return roof_from_json(json::parse(read_text_file(path)));
    if (g.config.contains("roof")) return roof_from_json(g.config["roof"]);
    if (g.config.contains("roof_path"))
        return roof_from_json(
            json::parse(read_text_file(g.config["roof_path"])));
    return constant_roof();
}

std::map<int, PlateauPoly> parse_substitutions(const RotationSpec& spec,
                                               const std::string& text) {
    // "n:mu,n:mu" pairs
    std::map<int, PlateauPoly> subs;
    if (text.empty()) return subs;
    std::istringstream is(text);
    std::string item;
    while (std::getline(is, item, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos)
            throw InvalidInput("substitution must look like n:mu");
        int n = std::stoi(item.substr(0, colon));
        double mu = std::stod(item.substr(colon + 1));
        subs.emplace(n, build_P_mu_n(n, mu, spec));
    }
    return subs;
}

Box3 parse_box(const std::string& text) {
    std::vector<double> vals;
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, ',')) vals.push_back(std::stod(tok));
    if (vals.size() != 6) throw InvalidInput("--box wants x0,x1,y0,y1,z0,z1");
    Box3 b{vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]};
    b.validate();
    return b;
}

std::vector<long long> parse_ll_list(const std::string& text) {
    std::vector<long long> vals;
    std::istringstream is(text);
    std::string tok;
    while (std::getline(is, tok, ',')) vals.push_back(std::stoll(tok));
    return vals;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"fbar-lab: rotations, roofs, special flows, fbar metrics, "
                 "Rokhlin towers and mixing diagnostics"};
    app.require_subcommand(1);

    GlobalOpts g;
    app.add_option("--config", g.config_path, "run-config JSON path");
    app.add_option("--seed", g.seed, "master RNG seed");
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--precision-bits", g.precision_bits,
                   "precision request for rotation materialization");

    // shared per-subcommand inputs
    std::string rotation_path, roof_path;
    std::vector<long long> pq_x, pq_y;

    auto add_rotation_opts = [&](CLI::App* cmd) {
        cmd->add_option("--rotation", rotation_path, "rotation spec JSON");
        cmd->add_option("--pq-x", pq_x, "partial quotients of Omega");
        cmd->add_option("--pq-y", pq_y, "partial quotients of Omega'");
    };

    // ---- rot ------------------------------------------------------------
    auto* rot = app.add_subcommand("rot", "rotation arithmetic");
    auto* rot_build = rot->add_subcommand("build", "materialize a rotation");
    add_rotation_opts(rot_build);
    rot_build->callback([&] {
        RotationSpec spec = load_rotation(g, rotation_path, pq_x, pq_y);
        json j = to_json(spec);
        json qs = json::array(), qps = json::array(), betas = json::array();
        for (int n = 0; n <= spec.x().depth(); ++n) {
            qs.push_back(spec.q(n));
            betas.push_back(spec.x().beta(n).to_double());
        }
        for (int n = 0; n <= spec.y().depth(); ++n) qps.push_back(spec.qp(n));
        json rep{{"schema_version", kSchemaVersion},
                 {"spec", j},
                 {"q", qs},
                 {"q_prime", qps},
                 {"beta", betas},
                 {"omega_x", spec.omega_x()},
                 {"omega_y", spec.omega_y()}};
        emit_json(g, "rotation.json", rep, g.seed);
        std::cout << "rotation: q up to " << spec.q(spec.x().depth())
                  << ", q' up to " << spec.qp(spec.y().depth()) << "\n";
    });

    std::string growth_mode = "surrogate";
    double growth_g = 2.0;
    int growth_depth = -1;
    auto* rot_growth =
        rot->add_subcommand("check-growth", "verify growth inequalities");
    add_rotation_opts(rot_growth);
    rot_growth->add_option("--mode", growth_mode, "paper|surrogate");
    rot_growth->add_option("--g", growth_g, "surrogate factor");
    rot_growth->add_option("--depth", growth_depth, "levels to check");
    rot_growth->callback([&] {
        RotationSpec spec = load_rotation(g, rotation_path, pq_x, pq_y);
        if (growth_mode != "paper" && growth_mode != "surrogate")
            throw InvalidInput("--mode must be paper or surrogate");
        GrowthModel model = growth_mode == "paper"
                                ? GrowthModel::paper()
                                : GrowthModel::surrogate(growth_g);
        int depth = growth_depth >= 0
                        ? growth_depth
                        : std::min(spec.x().depth(), spec.y().depth());
        GrowthReport rep = check_growth(spec, model, depth);
        emit_json(g, "growth.json", to_json(rep), g.seed);
        for (const auto& l : rep.levels)
            std::cout << "level " << l.n << ": "
                      << (l.pass() ? "pass" : "FAIL") << "\n";
        std::cout << (rep.all_pass() ? "growth: pass" : "growth: FAIL")
                  << "\n";
    });

    // ---- poly -----------------------------------------------------------
    auto* poly = app.add_subcommand("poly", "trigonometric polynomials");
    std::string poly_path;
    auto* poly_solve = poly->add_subcommand("solve-cohomological",
                                            "solve P = Q o R_omega - Q");
    add_rotation_opts(poly_solve);
    poly_solve->add_option("--poly", poly_path, "polynomial JSON")->required();
    poly_solve->callback([&] {
        RotationSpec spec = load_rotation(g, rotation_path, pq_x, pq_y);
        TrigPoly P =
            trigpoly_from_json(json::parse(read_text_file(poly_path)));
        TrigPoly Q = solve_cohomological(P, spec);
        json rep{{"schema_version", kSchemaVersion},
                 {"Q", to_json(Q)},
                 {"norm_bound_C0", Q.norm_bound(0)},
                 {"norm_bound_C1", Q.norm_bound(1)}};
        emit_json(g, "cohomological.json", rep, g.seed);
        std::cout << "deg Q = " << Q.degree()
                  << ", ||Q||_C0 <= " << fmt_double(Q.norm_bound(0)) << "\n";
    });

    long long birk_m = 1;
    double theta_x = 0.0, theta_y = 0.0;
    int birk_r = 0;
    auto* poly_birk =
        poly->add_subcommand("birkhoff", "Birkhoff sum and bound");
    add_rotation_opts(poly_birk);
    poly_birk->add_option("--poly", poly_path, "polynomial JSON")->required();
    poly_birk->add_option("--m", birk_m, "number of terms")->required();
    poly_birk->add_option("--theta-x", theta_x, "base point x");
    poly_birk->add_option("--theta-y", theta_y, "base point y");
    poly_birk->add_option("--r", birk_r, "derivative order for the bound");
    poly_birk->callback([&] {
        RotationSpec spec = load_rotation(g, rotation_path, pq_x, pq_y);
        TrigPoly P =
            trigpoly_from_json(json::parse(read_text_file(poly_path)));
        double value = birkhoff_sum(P, spec, birk_m, {theta_x, theta_y});
        json rep{{"schema_version", kSchemaVersion},
                 {"m", birk_m},
                 {"value", value}};
        if (P.zero_average())
            rep["bound"] = birkhoff_bound(P, spec, birk_m, birk_r);
        emit_json(g, "birkhoff.json", rep, g.seed);
        std::cout << "S_m = " << fmt_double(value) << "\n";
    });

    // ---- roof -----------------------------------------------------------
    auto* roof_cmd = app.add_subcommand("roof", "roof functions");
    int roof_depth = 0;
    std::string substitute_text, base_path;
    auto* roof_build = roof_cmd->add_subcommand("build", "assemble a roof");
    add_rotation_opts(roof_build);
    roof_build->add_option("--depth", roof_depth, "truncation depth")
        ->required();
    roof_build->add_option("--substitute", substitute_text,
                           "plateau substitutions n:mu,...");
    roof_build->add_option("--base", base_path, "base 2D polynomial JSON");
    roof_build->callback([&] {
        RotationSpec spec = load_rotation(g, rotation_path, pq_x, pq_y);
        TrigPoly base =
            base_path.empty()
                ? TrigPoly(2)
                : trigpoly_from_json(json::parse(read_text_file(base_path)));
        auto subs = parse_substitutions(spec, substitute_text);
        RoofFunction roof = assemble_roof(spec, base, subs, roof_depth);
        emit_json(g, "roof.json", to_json(roof), g.seed);
        std::cout << "roof: depth " << roof_depth << ", average "
                  << fmt_double(roof.average()) << ", grid min "
                  << fmt_double(roof.min_on_grid(128)) << "\n";
    });

    int plateau_n = 1;
    double plateau_mu = 0.06;
    auto* roof_plateau = roof_cmd->add_subcommand(
        "verify-plateau", "build P_{mu,n} and report its margins");
    add_rotation_opts(roof_plateau);
    roof_plateau->add_option("--n", plateau_n, "construction index")
        ->required();
    roof_plateau->add_option("--mu", plateau_mu, "plateau parameter");
    roof_plateau->callback([&] {
        RotationSpec spec = load_rotation(g, rotation_path, pq_x, pq_y);
        PlateauPoly P = build_P_mu_n(plateau_n, plateau_mu, spec);
        auto mc = [](const MarginCheck& c) {
            return json{{"applicable", c.applicable},
                        {"pass", c.pass},
                        {"measured", c.measured},
                        {"required", c.required}};
        };
        json rep{{"schema_version", kSchemaVersion},
                 {"n", plateau_n},
                 {"q_n", P.qn},
                 {"mu", plateau_mu},
                 {"eta", P.eta.eta},
                 {"inv_eta", P.eta.inv_eta},
                 {"zero_average_exact", P.margins.zero_average_exact},
                 {"inv_eta_multiple_exact", P.margins.inv_eta_multiple_exact},
                 {"norm_c0", mc(P.margins.norm_c0)},
                 {"norm_bounds", P.margins.norm_bounds},
                 {"plateau_plus", mc(P.margins.plateau_plus)},
                 {"plateau_minus", mc(P.margins.plateau_minus)},
                 {"slope_descending", mc(P.margins.slope_descending)},
                 {"slope_ascending", mc(P.margins.slope_ascending)},
                 {"kernel_integral", mc(P.margins.kernel_integral)},
                 {"tail", mc(P.margins.tail)}};
        emit_json(g, "plateau.json", rep, g.seed);
        bool all = P.margins.plateau_plus.pass &&
                   P.margins.plateau_minus.pass &&
                   P.margins.slope_descending.pass &&
                   P.margins.slope_ascending.pass;
        std::cout << "plateau P_{mu," << plateau_n << "}: eta = 1/"
                  << P.eta.inv_eta << ", properties "
                  << (all ? "pass" : "see margins") << "\n";
    });

    // ---- flow -----------------------------------------------------------
    auto* flow_cmd = app.add_subcommand("flow", "normalized time-one map");
    long long orbit_steps = 100;
    std::string emit_mode = "csv";
    double start_x = 0.1, start_y = 0.2, start_z = 0.3;
    auto* flow_orbit = flow_cmd->add_subcommand("orbit", "iterate G");
    add_rotation_opts(flow_orbit);
    flow_orbit->add_option("--roof", roof_path, "roof JSON");
    flow_orbit->add_option("--steps", orbit_steps, "orbit length")->required();
    flow_orbit->add_option("--emit", emit_mode, "csv");
    flow_orbit->add_option("--x", start_x, "start x");
    flow_orbit->add_option("--y", start_y, "start y");
    flow_orbit->add_option("--z", start_z, "start z");
    flow_orbit->callback([&] {
        RotationSpec spec = load_rotation(g, rotation_path, pq_x, pq_y);
        RoofFunction roof = load_roof(g, roof_path);
        NormalizedFlowMap G(roof, spec);
        std::ostringstream os;
        os << "step,x,y,z\n";
        os << "0," << fmt_double(start_x) << ',' << fmt_double(start_y) << ','
           << fmt_double(start_z) << "\n";
        G.orbit_run({start_x, start_y, start_z}, orbit_steps,
                    [&](long long i, const Vec3& p) {
                        os << i << ',' << fmt_double(p.x) << ','
                           << fmt_double(p.y) << ',' << fmt_double(p.z)
                           << "\n";
                    });
        write_text_file(out_path(g, "orbit.csv"), os.str());
        std::cout << "orbit: " << orbit_steps << " steps written\n";
    });

    std::string box_text;
    long long cmd_samples = 0;
    auto* flow_measure =
        flow_cmd->add_subcommand("measure", "invariant measure of a box");
    add_rotation_opts(flow_measure);
    flow_measure->add_option("--roof", roof_path, "roof JSON");
    flow_measure->add_option("--box", box_text, "x0,x1,y0,y1,z0,z1")
        ->required();
    flow_measure->add_option("--samples", cmd_samples, "MC samples");
    flow_measure->callback([&] {
        RotationSpec spec = load_rotation(g, rotation_path, pq_x, pq_y);
        RoofFunction roof = load_roof(g, roof_path);
        Box3 box = parse_box(box_text);
        long long n = cmd_samples > 0 ? cmd_samples : g.samples;
        MeasureEstimate est = invariant_measure(box, roof, spec, n, g.seed);
        emit_json(g, "measure.json", to_json(est), g.seed);
        std::cout << "mu(box) = " << fmt_double(est.estimate) << " +- "
                  << fmt_double(est.se);
        if (est.closed_form)
            std::cout << " (closed form " << fmt_double(*est.closed_form)
                      << ")";
        std::cout << "\n";
    });

    // ---- sym ------------------------------------------------------------
    auto* sym = app.add_subcommand("sym", "names and fbar metrics");
    std::string file_a, file_b;
    long long band = 0;
    auto* sym_fbar = sym->add_subcommand("fbar", "fbar distance of two names");
    sym_fbar->add_option("--file-a", file_a, "name CSV")->required();
    sym_fbar->add_option("--file-b", file_b, "name CSV")->required();
    sym_fbar->add_option("--band", band, "banded accelerator width");
    sym_fbar->callback([&] {
        Word a = read_word_file(file_a), b = read_word_file(file_b);
        double value;
        if (band > 0) {
            BandedFbar r = fbar_banded(a, b, band);
            value = r.exact ? r.value : fbar(a, b); // saturated: full DP
        } else {
            value = fbar(a, b);
        }
        json rep{{"schema_version", kSchemaVersion},
                 {"length", a.length()},
                 {"fbar", value},
                 {"hamming", hamming(a, b)}};
        emit_json(g, "fbar.json", rep, g.seed);
        std::cout << fmt_double(value) << "\n";
    });

    double pp_alpha = 0.0, pp_delta = 0.1;
    long long pp_n = 16;
    int pp_centers = 4;
    long long pp_samples = 0;
    int part_level = 1;
    auto* sym_pp = sym->add_subcommand(
        "property-p", "estimate property P(alpha, delta, n)");
    add_rotation_opts(sym_pp);
    sym_pp->add_option("--roof", roof_path, "roof JSON");
    sym_pp->add_option("--alpha", pp_alpha, "alpha")->required();
    sym_pp->add_option("--delta", pp_delta, "delta")->required();
    sym_pp->add_option("--n", pp_n, "name length")->required();
    sym_pp->add_option("--centers", pp_centers, "candidate centers");
    sym_pp->add_option("--samples", pp_samples, "samples per run");
    sym_pp->add_option("--partition-level", part_level,
                       "cube partition level");
    sym_pp->callback([&] {
        RotationSpec spec = load_rotation(g, rotation_path, pq_x, pq_y);
        RoofFunction roof = load_roof(g, roof_path);
        NormalizedFlowMap G(roof, spec);
        FlowInvariantMeasure measure(roof, spec);
        CubePartition part(part_level);
        long long n = pp_samples > 0 ? pp_samples : g.samples;
        PropertyPReport rep = estimate_property_P(
            G, part, measure, pp_alpha, pp_delta, pp_n, pp_centers, n, g.seed);
        emit_json(g, "property_p.json", to_json(rep), g.seed);
        std::cout << (rep.pass ? "PASS" : "no certificate")
                  << ", best fraction " << fmt_double(rep.best_fraction)
                  << "\n";
    });

    // ---- tower ----------------------------------------------------------
    auto* tower = app.add_subcommand("tower", "Rokhlin towers");
    std::string tower_path, tower_path_b;

    auto load_tower = [&](const std::string& path, const MapT3* map,
                          const MeasureModel* meas) {
        json j = json::parse(read_text_file(path));
        RokhlinTower t;
        t.base = box_from_json(j.at("base"));
        t.height = j.at("height").get<long long>();
        t.system = {map, meas};
        return t;
    };

    auto* tower_verify =
        tower->add_subcommand("verify", "disjointness certificate");
    add_rotation_opts(tower_verify);
    tower_verify->add_option("--roof", roof_path, "roof JSON");
    tower_verify->add_option("--tower", tower_path, "tower JSON")->required();
    tower_verify->add_option("--samples", cmd_samples, "samples");
    tower_verify->callback([&] {
        RotationSpec spec = load_rotation(g, rotation_path, pq_x, pq_y);
        RoofFunction roof = load_roof(g, roof_path);
        NormalizedFlowMap G(roof, spec);
        FlowInvariantMeasure meas(roof, spec);
        RokhlinTower t = load_tower(tower_path, &G, &meas);
        long long n = cmd_samples > 0 ? cmd_samples : g.samples;
        auto cert = verify_disjointness(t, n, g.seed);
        emit_json(g, "tower_verify.json", to_json(cert), g.seed);
        std::cout << (cert.refuted ? "REFUTED" : "no refutation") << " in "
                  << n << " samples\n";
    });

    auto* tower_mono = tower->add_subcommand(
        "mono", "monochromaticity against a cube partition");
    add_rotation_opts(tower_mono);
    tower_mono->add_option("--roof", roof_path, "roof JSON");
    tower_mono->add_option("--tower", tower_path, "tower JSON")->required();
    tower_mono->add_option("--level", part_level, "partition level")
        ->required();
    tower_mono->add_option("--samples", cmd_samples, "samples");
    tower_mono->callback([&] {
        RotationSpec spec = load_rotation(g, rotation_path, pq_x, pq_y);
        RoofFunction roof = load_roof(g, roof_path);
        NormalizedFlowMap G(roof, spec);
        FlowInvariantMeasure meas(roof, spec);
        RokhlinTower t = load_tower(tower_path, &G, &meas);
        long long n = cmd_samples > 0 ? cmd_samples : g.samples;
        MonochromReport rep =
            monochromaticity(t, CubePartition(part_level), n, g.seed);
        emit_json(g, "tower_mono.json", to_json(rep), g.seed);
        std::cout << "Delta = " << fmt_double(rep.delta) << " +- "
                  << fmt_double(rep.delta_se) << ", difference set "
                  << fmt_double(rep.diff_set_measure) << "\n";
    });

    double product_c = 0.9;
    double delta_plus = -1.0, delta_minus = -1.0;
    auto* tower_product =
        tower->add_subcommand("product", "product tower on T x T");
    add_rotation_opts(tower_product);
    tower_product->add_option("--roof", roof_path, "roof JSON");
    tower_product->add_option("--tower-plus", tower_path, "tower JSON")
        ->required();
    tower_product->add_option("--tower-minus", tower_path_b, "tower JSON")
        ->required();
    tower_product->add_option("--c", product_c, "size constant c");
    tower_product->add_option("--samples", cmd_samples, "samples");
    tower_product->add_option("--delta-plus", delta_plus,
                              "monochromaticity of the + tower");
    tower_product->add_option("--delta-minus", delta_minus,
                              "monochromaticity of the - tower");
    tower_product->callback([&] {
        RotationSpec spec = load_rotation(g, rotation_path, pq_x, pq_y);
        RoofFunction roof = load_roof(g, roof_path);
        NormalizedFlowMap G(roof, spec);
        FlowInvariantMeasure meas(roof, spec);
        RokhlinTower tp = load_tower(tower_path, &G, &meas);
        RokhlinTower tm = load_tower(tower_path_b, &G, &meas);
        long long n = cmd_samples > 0 ? cmd_samples : g.samples;
        std::optional<double> dp, dm;
        if (delta_plus >= 0) dp = delta_plus;
        if (delta_minus >= 0) dm = delta_minus;
        ProductTowerResult res =
            product_tower(tp, tm, product_c, n, g.seed, dp, dm);
        emit_json(g, "tower_product.json", to_json(res), g.seed);
        std::cout << "product height " << res.height << ", size "
                  << fmt_double(res.size_estimate) << " vs required "
                  << fmt_double(res.required_size)
                  << (res.size_ok ? " (ok)" : " (FAIL)") << "\n";
    });

    int paper_m = 1;
    double paper_mu = 0.06;
    auto* tower_paper = tower->add_subcommand(
        "paper-build", "explicit construction towers at index m");
    add_rotation_opts(tower_paper);
    tower_paper->add_option("--roof", roof_path,
                            "roof JSON (needs the plateau substitution at m)");
    tower_paper->add_option("--m", paper_m, "construction index")->required();
    tower_paper->add_option("--mu", paper_mu, "plateau parameter");
    tower_paper->add_option("--samples", cmd_samples, "samples");
    tower_paper->callback([&] {
        RotationSpec spec = load_rotation(g, rotation_path, pq_x, pq_y);
        RoofFunction roof = load_roof(g, roof_path);
        NormalizedFlowMap G(roof, spec);
        long long n = cmd_samples > 0 ? cmd_samples : g.samples;
        PaperTowersReport rep =
            build_paper_towers(G, paper_m, paper_mu, n, g.seed);
        emit_json(g, "tower_paper.json", to_json(rep), g.seed);
        std::cout << "h+ = " << rep.plus.height
                  << ", h- = " << rep.minus.height << ", core "
                  << (rep.core_pass() ? "pass" : "FAIL") << "\n";
        for (const auto& d : rep.diagnostics)
            std::cout << "  diagnostic: " << d << "\n";
    });

    std::string law_text = "(n+1)^-0.25", mode_text = "single";
    long long sched_steps = 1000;
    auto* tower_sched =
        tower->add_subcommand("schedule", "loose-Bernoullicity schedule");
    tower_sched->add_option("--law", law_text, "size law, e.g. (n+1)^-0.25");
    tower_sched->add_option("--mode", mode_text, "single|product");
    tower_sched->add_option("--steps", sched_steps, "steps")->required();
    tower_sched->callback([&] {
        if (mode_text != "single" && mode_text != "product")
            throw InvalidInput("--mode must be single or product");
        SizeLaw law = SizeLaw::parse(law_text);
        LBSchedule sch = lb_schedule(law,
                                     mode_text == "single"
                                         ? LBSchedule::Mode::single
                                         : LBSchedule::Mode::product,
                                     sched_steps);
        emit_json(g, "schedule.json", to_json(sch), g.seed);
        std::ostringstream os;
        os << "n,mu,delta,alpha\n";
        for (size_t i = 0; i < sch.delta.size(); ++i)
            os << i << ',' << fmt_double(law.at(static_cast<long long>(i)))
               << ',' << fmt_double(sch.delta[i]) << ','
               << fmt_double(sch.alpha[i]) << "\n";
        write_text_file(out_path(g, "schedule.csv"), os.str());
        std::cout << "final alpha " << fmt_double(sch.final_alpha);
        if (sch.crossing_step)
            std::cout << ", crosses 1/2 at step " << *sch.crossing_step;
        std::cout << "\n";
    });

    // ---- diag -----------------------------------------------------------
    auto* diag = app.add_subcommand("diag", "mixing diagnostics");
    std::string lags_text = "1,2,4", box_a_text, box_b_text;
    auto* diag_corr =
        diag->add_subcommand("correlation", "correlation decay series");
    add_rotation_opts(diag_corr);
    diag_corr->add_option("--roof", roof_path, "roof JSON");
    diag_corr->add_option("--lags", lags_text, "sorted lag list")->required();
    diag_corr->add_option("--box-a", box_a_text, "x0,x1,y0,y1,z0,z1")
        ->required();
    diag_corr->add_option("--box-b", box_b_text, "x0,x1,y0,y1,z0,z1")
        ->required();
    diag_corr->add_option("--samples", cmd_samples, "samples");
    diag_corr->add_option("--emit", emit_mode, "csv");
    diag_corr->callback([&] {
        RotationSpec spec = load_rotation(g, rotation_path, pq_x, pq_y);
        RoofFunction roof = load_roof(g, roof_path);
        NormalizedFlowMap G(roof, spec);
        FlowInvariantMeasure meas(roof, spec);
        long long n = cmd_samples > 0 ? cmd_samples : g.samples;
        CorrelationSeries s =
            correlation(G, meas, parse_box(box_a_text), parse_box(box_b_text),
                        parse_ll_list(lags_text), n, g.seed);
        emit_json(g, "correlation.json", to_json(s), g.seed);
        std::ostringstream os;
        os << "lag,joint,estimate,se\n";
        for (const auto& e : s.entries)
            os << e.lag << ',' << fmt_double(e.joint) << ','
               << fmt_double(e.estimate) << ',' << fmt_double(e.se) << "\n";
        write_text_file(out_path(g, "correlation.csv"), os.str());
        std::cout << "correlation series: " << s.entries.size()
                  << " lags written\n";
    });

    int crit_n = 1;
    std::string m_text = "10,100";
    double crit_rn = -1.0;
    auto* diag_crit =
        diag->add_subcommand("criterion", "mixing criterion margins");
    add_rotation_opts(diag_crit);
    diag_crit->add_option("--roof", roof_path, "roof JSON");
    diag_crit->add_option("--n", crit_n, "construction index")->required();
    diag_crit->add_option("--m", m_text, "comma-separated m list")->required();
    diag_crit->add_option("--r-n", crit_rn, "excluded interval half-length");
    diag_crit->callback([&] {
        RotationSpec spec = load_rotation(g, rotation_path, pq_x, pq_y);
        RoofFunction roof = load_roof(g, roof_path);
        CriterionConfig cfg;
        cfg.r_n_override = crit_rn;
        CriterionReport rep = check_mixing_criterion(
            roof, spec, crit_n, parse_ll_list(m_text), cfg);
        emit_json(g, "criterion.json", to_json(rep), g.seed);
        for (const auto& e : rep.entries)
            std::cout << "m = " << e.m << ": x " << (e.x_ok ? "ok" : "fail")
                      << " (margin "
                      << fmt_double(e.min_abs_dx - e.required_x) << "), y "
                      << (e.y_ok ? "ok" : "fail") << "\n";
    });

    // Global flags may appear after the subcommand, as in
    // `sym property-p ... --seed S`.
    std::function<void(CLI::App*)> enable_fallthrough = [&](CLI::App* a) {
        a->fallthrough();
        for (auto* sub : a->get_subcommands(
                 [](const CLI::App*) { return true; }))
            enable_fallthrough(sub);
    };
    enable_fallthrough(&app);

    // Config must be parsed before any callback runs; CLI11 fires callbacks
    // inside parse, so pre-scan --config here.
    for (int i = 1; i + 1 < argc || i < argc; ++i) {
        std::string a = argv[i];
        if (a == "--config" && i + 1 < argc) {
            g.config_path = argv[i + 1];
            break;
        }
        if (a.rfind("--config=", 0) == 0) {
            g.config_path = a.substr(9);
            break;
        }
    }

    try {
        apply_config(g);
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const PreconditionFailed& e) {
        std::cerr << "precondition failed: " << e.what() << "\n";
        return 2;
    } catch (const NumericFailure& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
