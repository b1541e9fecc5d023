#include "fbarlab/serialize.hpp"

#include <fstream>
#include <sstream>

namespace fbarlab {

json to_json(const RotationSpec& spec) {
    return json{{"pq_x", spec.x().quotients()},
                {"pq_y", spec.y().quotients()},
                {"precision_bits", spec.precision_bits()}};
}

RotationSpec rotation_from_json(const json& j) {
    if (!j.contains("pq_x") || !j.contains("pq_y"))
        throw InvalidInput("rotation spec needs pq_x and pq_y");
    return build_rotation(j.at("pq_x").get<std::vector<long long>>(),
                          j.at("pq_y").get<std::vector<long long>>(),
                          j.value("precision_bits", 256));
}

json to_json(const TrigPoly& p) {
    json arr = json::array();
    for (const auto& [k, c] : p.coefficients()) {
        json kk = p.dim() == 1 ? json::array({k[0]})
                               : json::array({k[0], k[1]});
        arr.push_back(json{{"k", kk}, {"re", c.real()}, {"im", c.imag()}});
    }
    return json{{"dim", p.dim()}, {"coefficients", arr}};
}

TrigPoly trigpoly_from_json(const json& j) {
    int dim = j.value("dim", 0);
    const json& arr = j.contains("coefficients") ? j.at("coefficients") : j;
    if (!arr.is_array()) throw InvalidInput("trig poly: expected array");
    if (dim == 0) {
        dim = 1;
        for (const auto& e : arr)
            if (e.at("k").size() == 2 && e.at("k")[1].get<int>() != 0) dim = 2;
    }
    TrigPoly p(dim);
    for (const auto& e : arr) {
        const json& kk = e.at("k");
        Freq k{kk[0].get<int>(), kk.size() > 1 ? kk[1].get<int>() : 0};
        std::complex<double> c(e.value("re", 0.0), e.value("im", 0.0));
        if (c == 0.0) continue;
        // entries may list both +k and -k; set_coef writes the pair, so only
        // accept the canonical representative to avoid double writes
        Freq neg{-k[0], -k[1]};
        if (neg < k && p.coef(neg) != 0.0) continue;
        p.set_coef(k, c);
    }
    return p;
}

json to_json(const RoofFunction& roof) {
    json xt = json::array();
    for (const auto& t : roof.x_cos_terms())
        xt.push_back(json{{"kind", "cos"},
                          {"index", t.index},
                          {"freq", t.freq},
                          {"amp", t.amp}});
    for (const auto& t : roof.x_plateau_terms())
        xt.push_back(json{{"kind", "plateau"},
                          {"index", t.poly.n_index},
                          {"q", t.poly.qn},
                          {"mu", t.poly.mu},
                          {"inv_eta", t.poly.eta.inv_eta},
                          {"base_freq", t.poly.series.base_freq()},
                          {"coeffs", t.poly.series.coeffs()}});
    json yt = json::array();
    for (const auto& t : roof.y_cos_terms())
        yt.push_back(json{{"kind", "cos"},
                          {"index", t.index},
                          {"freq", t.freq},
                          {"amp", t.amp}});
    return json{{"schema_version", kSchemaVersion},
                {"depth", roof.depth()},
                {"base", to_json(roof.base())},
                {"x_terms", xt},
                {"y_terms", yt}};
}

RoofFunction roof_from_json(const json& j) {
    TrigPoly base = j.contains("base") ? trigpoly_from_json(j.at("base"))
                                       : TrigPoly(2);
    if (base.dim() == 1) {
        TrigPoly b2(2);
        for (const auto& [k, c] : base.coefficients())
            if (!(k[0] == 0 && k[1] == 0) && (k[0] > 0))
                b2.set_coef(k, c);
        if (base.coef({0, 0}) != 0.0) b2.set_coef({0, 0}, base.coef({0, 0}));
        base = b2;
    }
    RoofFunction roof(base);
    roof.set_depth(j.value("depth", 0));
    for (const auto& t : j.value("x_terms", json::array())) {
        std::string kind = t.value("kind", "cos");
        if (kind == "cos") {
            roof.add_x_cos(t.value("index", 0), t.at("freq").get<long long>(),
                           t.at("amp").get<double>());
        } else if (kind == "plateau") {
            PlateauPoly p;
            p.n_index = t.value("index", 0);
            p.qn = t.value("q", t.at("base_freq").get<long long>());
            p.mu = t.value("mu", 0.0);
            p.eta.inv_eta = t.value("inv_eta", 0LL);
            p.eta.eta = p.eta.inv_eta
                            ? 1.0 / static_cast<double>(p.eta.inv_eta)
                            : 0.0;
            p.eta.q = p.qn;
            p.series = SineSeries(t.at("base_freq").get<long long>(),
                                  t.at("coeffs").get<std::vector<double>>());
            roof.add_x_plateau(std::move(p));
        } else {
            throw InvalidInput("roof: unknown x-term kind '" + kind + "'");
        }
    }
    for (const auto& t : j.value("y_terms", json::array()))
        roof.add_y_cos(t.value("index", 0), t.at("freq").get<long long>(),
                       t.at("amp").get<double>());
    return roof;
}

json to_json(const Box3& b) {
    return json{{"x", {b.x0, b.x1}}, {"y", {b.y0, b.y1}}, {"z", {b.z0, b.z1}}};
}

Box3 box_from_json(const json& j) {
    Box3 b;
    b.x0 = j.at("x")[0];
    b.x1 = j.at("x")[1];
    b.y0 = j.at("y")[0];
    b.y1 = j.at("y")[1];
    b.z0 = j.at("z")[0];
    b.z1 = j.at("z")[1];
    b.validate();
    return b;
}

json tower_to_json(const Box3& base, long long height) {
    return json{{"schema_version", kSchemaVersion},
                {"base", to_json(base)},
                {"height", height}};
}

json to_json(const GrowthReport& r) {
    json levels = json::array();
    for (const auto& l : r.levels)
        levels.push_back(json{{"n", l.n},
                              {"x_to_y_ok", l.x_to_y_ok},
                              {"y_to_next_ok", l.y_to_next_ok},
                              {"has_next", l.has_next},
                              {"pass", l.pass()}});
    return json{{"schema_version", kSchemaVersion},
                {"levels", levels},
                {"all_pass", r.all_pass()}};
}

json to_json(const MeasureEstimate& e) {
    json j{{"schema_version", kSchemaVersion},
           {"estimate", e.estimate},
           {"se", e.se},
           {"samples", e.samples},
           {"seed", e.seed}};
    if (e.closed_form) j["closed_form"] = *e.closed_form;
    return j;
}

json to_json(const DisjointnessCertificate& c) {
    json j{{"schema_version", kSchemaVersion},
           {"refuted", c.refuted},
           {"samples", c.samples},
           {"seed", c.seed},
           {"note", "absence of refutation is statistical evidence, not proof"}};
    if (c.refuted) {
        j["witness"] = {c.witness.x, c.witness.y, c.witness.z};
        j["witness_step"] = c.witness_step;
    }
    return j;
}

json to_json(const PrecisionEstimate& e) {
    return json{{"schema_version", kSchemaVersion},
                {"rho", e.rho},
                {"se", e.se},
                {"mu_base", e.mu_base},
                {"samples", e.samples},
                {"seed", e.seed}};
}

json to_json(const MonochromReport& r) {
    return json{{"schema_version", kSchemaVersion},
                {"labels", r.labels},
                {"delta", r.delta},
                {"delta_se", r.delta_se},
                {"mu_base", r.mu_base},
                {"diff_set_measure", r.diff_set_measure},
                {"diff_set_se", r.diff_set_se},
                {"samples", r.samples},
                {"seed", r.seed}};
}

json to_json(const ProductTowerResult& r) {
    return json{{"schema_version", kSchemaVersion},
                {"height", r.height},
                {"size_estimate", r.size_estimate},
                {"size_se", r.size_se},
                {"required_size", r.required_size},
                {"size_ok", r.size_ok},
                {"mu_plus", r.mu_plus},
                {"mu_minus", r.mu_minus},
                {"rho_plus", r.rho_plus},
                {"rho_minus", r.rho_minus},
                {"mu_E_plus", r.mu_E_plus},
                {"mu_E_minus", r.mu_E_minus},
                {"mono_bound", r.mono_bound},
                {"samples", r.samples},
                {"seed", r.seed}};
}

json to_json(const PaperTowersReport& r) {
    auto rows = [](const std::vector<BirkhoffMarginRow>& v) {
        json a = json::array();
        for (const auto& row : v)
            a.push_back(json{{"l", row.l},
                             {"worst_error", row.worst_error},
                             {"required", row.required},
                             {"pass", row.pass}});
        return a;
    };
    return json{{"schema_version", kSchemaVersion},
                {"m_index", r.m_index},
                {"q_m", r.q_m},
                {"mu", r.mu},
                {"eta", r.eta.eta},
                {"inv_eta", r.eta.inv_eta},
                {"tower_plus", tower_to_json(r.plus.base, r.plus.height)},
                {"tower_minus", tower_to_json(r.minus.base, r.minus.height)},
                {"height_relation_ok", r.height_relation_ok},
                {"disjoint_plus", to_json(r.disjoint_plus)},
                {"disjoint_minus", to_json(r.disjoint_minus)},
                {"size_plus", r.size_plus},
                {"size_minus", r.size_minus},
                {"size_required", r.size_required},
                {"size_plus_ok", r.size_plus_ok},
                {"size_minus_ok", r.size_minus_ok},
                {"rho_plus", to_json(r.rho_plus)},
                {"rho_minus", to_json(r.rho_minus)},
                {"rho_required", r.rho_required},
                {"rho_plus_ok", r.rho_plus_ok},
                {"rho_minus_ok", r.rho_minus_ok},
                {"birkhoff_plus", rows(r.birkhoff_plus)},
                {"birkhoff_minus", rows(r.birkhoff_minus)},
                {"diagnostics", r.diagnostics},
                {"core_pass", r.core_pass()}};
}

json to_json(const LBSchedule& s) {
    json j{{"schema_version", kSchemaVersion},
           {"mode", s.mode == LBSchedule::Mode::single ? "single" : "product"},
           {"alpha", s.alpha},
           {"delta", s.delta},
           {"plateaued", s.plateaued},
           {"final_alpha", s.final_alpha}};
    if (s.crossing_step) j["crossing_step"] = *s.crossing_step;
    if (s.diverges) j["sum_squares_diverges"] = *s.diverges;
    return j;
}

json to_json(const PropertyPReport& r) {
    return json{{"schema_version", kSchemaVersion},
                {"pass", r.pass},
                {"trivial_alpha_zero", r.trivial_alpha_zero},
                {"radius", r.radius},
                {"witness_center", r.witness_center},
                {"best_fraction", r.best_fraction},
                {"best_fraction_se", r.best_fraction_se},
                {"center_fractions", r.center_fractions},
                {"samples", r.samples},
                {"seed", r.seed}};
}

json to_json(const CorrelationSeries& s) {
    json entries = json::array();
    for (const auto& e : s.entries)
        entries.push_back(json{{"lag", e.lag},
                               {"joint", e.joint},
                               {"estimate", e.estimate},
                               {"se", e.se}});
    return json{{"schema_version", kSchemaVersion},
                {"mu_A", s.mu_A},
                {"mu_B", s.mu_B},
                {"mu_A_se", s.mu_A_se},
                {"mu_B_se", s.mu_B_se},
                {"entries", entries},
                {"samples", s.samples},
                {"seed", s.seed}};
}

json to_json(const CriterionReport& r) {
    json entries = json::array();
    for (const auto& e : r.entries)
        entries.push_back(json{{"m", e.m},
                               {"in_x_range", e.in_x_range},
                               {"in_y_range", e.in_y_range},
                               {"min_abs_dx", e.min_abs_dx},
                               {"required_x", e.required_x},
                               {"margin_x", e.min_abs_dx - e.required_x},
                               {"min_abs_dy", e.min_abs_dy},
                               {"required_y", e.required_y},
                               {"margin_y", e.min_abs_dy - e.required_y},
                               {"x_ok", e.x_ok},
                               {"y_ok", e.y_ok}});
    return json{{"schema_version", kSchemaVersion},
                {"n_index", r.n_index},
                {"r_n_x", r.r_n_x},
                {"r_n_y", r.r_n_y},
                {"substituted", r.substituted},
                {"entries", entries},
                {"all_pass", r.all_pass()}};
}

std::string word_to_csv(const Word& w) {
    std::ostringstream os;
    for (size_t i = 0; i < w.symbols.size(); ++i) {
        if (i) os << ',';
        os << w.symbols[i];
    }
    return os.str();
}

Word word_from_csv(const std::string& line) {
    Word w;
    std::string token;
    std::istringstream is(line);
    while (std::getline(is, token, ',')) {
        if (token.empty()) continue;
        w.symbols.push_back(static_cast<uint32_t>(std::stoul(token)));
    }
    if (w.symbols.empty()) throw InvalidInput("empty word");
    return w;
}

Word read_word_file(const std::string& path) {
    return word_from_csv(read_text_file(path));
}

void write_word_file(const std::string& path, const Word& w) {
    write_text_file(path, word_to_csv(w) + "\n");
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write file: " + path);
    out << content;
}

} // namespace fbarlab
