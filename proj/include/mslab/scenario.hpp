#pragma once

#include "deligne_props.hpp"
#include "instances.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <sstream>

// Scenario files, task dispatch and deterministic reports.
namespace mslab::cli {

using json = nlohmann::json;

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr const char* kScenarioSchema = "mslab-scenario/1";
inline constexpr const char* kReportSchema = "mslab-report/1";

enum Exit { kPass = 0, kFail = 1, kNotExists = 2, kSchema = 3 };

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotExistsError : std::runtime_error {
    std::string witness;
    NotExistsError(const std::string& what, std::string w) : std::runtime_error(what), witness(std::move(w)) {}
};

inline std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

// ---------------------------------------------------------------------------
// values

inline Rational parse_rational(const json& j, const std::string& where) {
    try {
        if (j.is_string()) return Rational::parse(j.get<std::string>());
        if (j.is_number_integer()) return Rational(j.get<long>());
    } catch (const std::exception& e) {
        throw SchemaError(where + ": " + e.what());
    }
    throw SchemaError(where + ": expected a rational as \"p/q\" or an integer");
}

inline json rational_json(const Rational& r) { return r.str(); }

inline int parse_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw SchemaError(where + ": expected an integer");
    return j.get<int>();
}

inline const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw SchemaError(where + ": missing '" + key + "'");
    return j.at(key);
}

inline std::string parse_name(const json& j, const std::string& where) {
    if (!j.is_string()) throw SchemaError(where + ": expected a name");
    return j.get<std::string>();
}

inline Vec parse_vec(const json& j, const std::string& where, int n = -1) {
    if (!j.is_array()) throw SchemaError(where + ": expected a vector");
    Vec v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(parse_rational(j[i], where + "[" + std::to_string(i) + "]"));
    if (n >= 0 && static_cast<int>(v.size()) != n) throw SchemaError(where + ": expected length " + std::to_string(n));
    return v;
}

inline json vec_json(const Vec& v) {
    json a = json::array();
    for (auto& x : v) a.push_back(rational_json(x));
    return a;
}

inline Matrix<Rational> parse_matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) throw SchemaError(where + ": expected a nonempty list of rows");
    std::vector<Vec> rows;
    for (std::size_t i = 0; i < j.size(); ++i) rows.push_back(parse_vec(j[i], where + "[" + std::to_string(i) + "]"));
    int c = static_cast<int>(rows[0].size());
    Matrix<Rational> m(static_cast<int>(rows.size()), c);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<int>(rows[i].size()) != c) throw SchemaError(where + ": ragged rows");
        for (int k = 0; k < c; ++k) m(static_cast<int>(i), k) = rows[i][k];
    }
    return m;
}

inline Matrix<Rational> parse_square(const json& j, const std::string& where, int n) {
    auto m = parse_matrix(j, where);
    if (m.rows() != n || m.cols() != n) throw SchemaError(where + ": expected " + std::to_string(n) + "x" + std::to_string(n));
    return m;
}

inline json matrix_json(const Matrix<Rational>& m) {
    json a = json::array();
    for (int i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i)));
    return a;
}

inline json poly_json(const Polynomial& p) {
    json a = json::array();
    for (auto& c : p.coeffs()) a.push_back(rational_json(c));
    return a;
}

inline json rf_json(const RationalFunction& f) {
    if (f.den().degree() == 0 && f.num().degree() <= 0) return rational_json(f.num().is_zero() ? Rational(0) : f.num().coeffs()[0] / f.den().coeffs()[0]);
    return json{{"num", poly_json(f.num())}, {"den", poly_json(f.den())}};
}

inline json matrix_json(const Matrix<RationalFunction>& m) {
    json a = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (int k = 0; k < m.cols(); ++k) r.push_back(rf_json(m(i, k)));
        a.push_back(r);
    }
    return a;
}

inline json checks_json(const std::vector<CheckLine>& cs) {
    json a = json::array();
    for (auto& c : cs) {
        json l{{"name", c.name}, {"pass", c.pass}};
        if (!c.witness.empty()) l["witness"] = c.witness;
        a.push_back(l);
    }
    return a;
}

inline json ints_json(const std::vector<int>& v) { return json(v); }

// ---------------------------------------------------------------------------
// scenario

inline Filtration<Rational> parse_filtration(const json& j, const std::string& where) {
    int n = parse_int(field(j, "dim", where), where + ".dim");
    if (n <= 0) throw SchemaError(where + ": dim must be positive");
    const json& steps = field(j, "steps", where);
    if (!steps.is_array() || steps.empty()) throw SchemaError(where + ".steps: expected a nonempty list");
    std::map<int, Subspace<Rational>> st;
    for (std::size_t i = 0; i < steps.size(); ++i) {
        std::string w = where + ".steps[" + std::to_string(i) + "]";
        int k = parse_int(field(steps[i], "weight", w), w + ".weight");
        const json& sp = field(steps[i], "span", w);
        Subspace<Rational> S(n);
        if (sp.is_string() && sp.get<std::string>() == "full") {
            S = Subspace<Rational>::full(n);
        } else {
            if (!sp.is_array()) throw SchemaError(w + ".span: expected vectors or \"full\"");
            std::vector<Vec> vs;
            for (std::size_t t = 0; t < sp.size(); ++t) vs.push_back(parse_vec(sp[t], w + ".span[" + std::to_string(t) + "]", n));
            S = Subspace<Rational>::span_vectors(n, vs);
        }
        if (st.count(k)) throw SchemaError(w + ": duplicate weight");
        st[k] = S;
    }
    try {
        return Filtration<Rational>::from_steps(n, st);
    } catch (const std::invalid_argument& e) {
        throw SchemaError(where + ": " + e.what());
    }
}

inline json filtration_json(const Filtration<Rational>& W) {
    int n = W.ambient();
    json steps = json::array();
    for (int k = W.lowest(); k <= W.highest(); ++k) {
        if (k > W.lowest() && W.at(k) == W.at(k - 1)) continue;
        json sp;
        if (W.at(k).is_full()) {
            sp = "full";
        } else {
            sp = json::array();
            Matrix<Rational> R = W.at(k).rows();
            for (int i = 0; i < R.rows(); ++i) sp.push_back(vec_json(R.row(i)));
        }
        steps.push_back({{"weight", k}, {"span", sp}});
    }
    return {{"dim", n}, {"steps", steps}};
}

inline Face parse_face(const json& j, const std::string& where) {
    if (!j.is_array()) throw SchemaError(where + ": expected a list of generator indices");
    Face f;
    for (auto& x : j) f.push_back(parse_int(x, where));
    std::sort(f.begin(), f.end());
    return f;
}

struct ActionSpec {
    std::string cone, W, Y;
    std::vector<std::string> images;
};

struct PointSpec {
    std::string cone;
    RatioPoint point;
};

struct BaseSpec {
    std::string cone;
    FaceBase base;
};

struct HeightSpec {
    bool family = false;
    bool derive_theta = false;  // family d, d' from theta exponents
    TateHeightInput tate;
    HeightFamilyParams params;
};

struct Task {
    std::string kind;
    json args;
};

struct Scenario {
    std::string field = "Q";
    std::map<std::string, Filtration<Rational>> filtrations;
    // coefficients of y^0, y^1, ... ; one entry over Q
    std::map<std::string, std::vector<Matrix<Rational>>> operators;
    std::map<std::string, Matrix<Rational>> splittings;
    std::map<std::string, Cone> cones;
    std::map<std::string, ActionSpec> actions;
    std::map<std::string, PointSpec> points;
    std::map<std::string, BaseSpec> bases;
    std::map<std::string, HeightSpec> heights;
    std::vector<Task> tasks;

    bool over_y() const { return field == "Q(y)"; }
};

inline const std::vector<std::string>& task_kinds() {
    static const std::vector<std::string> k{"validate", "split", "delta", "descend", "expand", "heights", "ratio", "eigen", "selftest"};
    return k;
}

namespace detail {

template <class Map>
void need(const Map& m, const json& args, const char* key, const std::string& where, const char* what) {
    std::string nm = parse_name(field(args, key, where), where + "." + key);
    if (!m.count(nm)) throw SchemaError(where + "." + key + ": undefined " + what + " '" + nm + "'");
}

template <class Map>
void need_list(const Map& m, const json& args, const char* key, const std::string& where, const char* what, std::size_t lo, std::size_t hi) {
    const json& l = field(args, key, where);
    if (!l.is_array() || l.size() < lo || l.size() > hi) throw SchemaError(where + "." + key + ": expected a list of names");
    for (auto& x : l) {
        std::string nm = parse_name(x, where + "." + key);
        if (!m.count(nm)) throw SchemaError(where + "." + key + ": undefined " + what + " '" + nm + "'");
    }
}

inline int op_dim(const Scenario& S, const std::string& nm) { return S.operators.at(nm)[0].rows(); }

inline void check_constant(const Scenario& S, const std::string& nm, const std::string& where) {
    if (S.operators.at(nm).size() != 1) throw SchemaError(where + ": operator '" + nm + "' must be constant here");
}

inline void check_order(const json& args, const std::string& where) {
    if (args.contains("order")) {
        int k = parse_int(args.at("order"), where + ".order");
        if (k < 0 || k > 64) throw SchemaError(where + ".order: out of range");
    }
}

inline void check_flavor(const json& args, const std::string& where) {
    if (args.contains("flavor")) {
        std::string f = parse_name(args.at("flavor"), where + ".flavor");
        if (f != "standard" && f != "narrower") throw SchemaError(where + ".flavor: expected standard|narrower");
    }
}

// W, N (list or single), Y with consistent dimensions
inline void check_system_args(const Scenario& S, const json& a, const std::string& where, bool list, std::size_t lo, std::size_t hi, bool y_required) {
    need(S.filtrations, a, "W", where, "filtration");
    int n = S.filtrations.at(a.at("W").get<std::string>()).ambient();
    std::vector<std::string> ns;
    if (list) {
        need_list(S.operators, a, "N", where, "operator", lo, hi);
        for (auto& x : a.at("N")) ns.push_back(x.get<std::string>());
    } else {
        need(S.operators, a, "N", where, "operator");
        ns.push_back(a.at("N").get<std::string>());
    }
    for (auto& nm : ns)
        if (op_dim(S, nm) != n) throw SchemaError(where + ": operator '" + nm + "' has the wrong dimension");
    if (y_required || a.contains("Y")) {
        need(S.splittings, a, "Y", where, "splitting");
        if (S.splittings.at(a.at("Y").get<std::string>()).rows() != n) throw SchemaError(where + ": splitting has the wrong dimension");
    }
}

inline void check_task(const Scenario& S, const Task& t, const std::string& where) {
    const json& a = t.args;
    if (!a.is_object()) throw SchemaError(where + ": task arguments must be an object");
    check_order(a, where);
    check_flavor(a, where);
    const std::string& k = t.kind;
    if (k == "validate") {
        if (a.contains("action")) {
            need(S.actions, a, "action", where, "action");
        } else {
            check_system_args(S, a, where, true, 1, 8, false);
            for (auto& x : a.at("N")) check_constant(S, x.get<std::string>(), where);
        }
    } else if (k == "split" || k == "delta") {
        check_system_args(S, a, where, false, 1, 1, true);
        if (!S.over_y()) check_constant(S, a.at("N").get<std::string>(), where);
    } else if (k == "descend") {
        check_system_args(S, a, where, true, 1, 8, true);
        for (auto& x : a.at("N")) check_constant(S, x.get<std::string>(), where);
    } else if (k == "expand") {
        std::string mode = a.contains("mode") ? parse_name(a.at("mode"), where + ".mode") : "one_var";
        if (mode == "multi") {
            need(S.actions, a, "action", where, "action");
            need(S.bases, a, "base", where, "base");
            need(S.points, a, "point", where, "ratio point");
        } else if (mode == "one_var" || mode == "mild") {
            check_system_args(S, a, where, true, 2, 2, true);
            for (auto& x : a.at("N")) check_constant(S, x.get<std::string>(), where);
        } else {
            throw SchemaError(where + ".mode: expected one_var|mild|multi");
        }
    } else if (k == "heights") {
        need(S.heights, a, "input", where, "height input");
    } else if (k == "ratio") {
        need(S.points, a, "point", where, "ratio point");
        need(S.bases, a, "base", where, "base");
    } else if (k == "eigen") {
        if (a.contains("triple")) {
            const json& tr = a.at("triple");
            int n = -1;
            for (const char* key : {"N0", "N1", "N2", "F"}) {
                need(S.operators, tr, key, where + ".triple", "operator");
                std::string nm = tr.at(key).get<std::string>();
                check_constant(S, nm, where);
                if (n >= 0 && op_dim(S, nm) != n) throw SchemaError(where + ".triple: operators of different size");
                n = op_dim(S, nm);
            }
            parse_rational(field(tr, "q", where + ".triple"), where + ".triple.q");
        } else {
            need(S.operators, a, "A", where, "operator");
            need(S.operators, a, "B", where, "operator");
            check_constant(S, a.at("A").get<std::string>(), where);
            check_constant(S, a.at("B").get<std::string>(), where);
            if (op_dim(S, a.at("A").get<std::string>()) != op_dim(S, a.at("B").get<std::string>()))
                throw SchemaError(where + ": A and B of different size");
            parse_vec(field(a, "relation", where), where + ".relation", 4);
            try {
                parse_case(parse_name(field(a, "case", where), where + ".case"));
            } catch (const std::invalid_argument& e) {
                throw SchemaError(where + ".case: " + e.what());
            }
        }
    } else if (k == "selftest") {
        if (a.contains("inject_fault")) parse_name(a.at("inject_fault"), where + ".inject_fault");
    } else {
        throw SchemaError(where + ": unknown task '" + k + "'");
    }
}

inline std::vector<int> parse_ints(const json& j, const std::string& where) {
    if (!j.is_array()) throw SchemaError(where + ": expected a list of integers");
    std::vector<int> v;
    for (auto& x : j) v.push_back(parse_int(x, where));
    return v;
}

inline std::vector<std::vector<int>> parse_int_grid(const json& j, const std::string& where) {
    if (!j.is_array()) throw SchemaError(where + ": expected a list of lists");
    std::vector<std::vector<int>> v;
    for (auto& x : j) v.push_back(parse_ints(x, where));
    return v;
}

inline HeightSpec parse_height(const json& j, const std::string& where) {
    HeightSpec h;
    std::string type = parse_name(field(j, "type", where), where + ".type");
    if (type == "tate") {
        h.tate.vq = parse_rational(field(j, "vq", where), where + ".vq");
        h.tate.m = parse_ints(field(j, "m", where), where + ".m");
        h.tate.n = parse_ints(field(j, "n", where), where + ".n");
        h.tate.valpha = parse_vec(field(j, "valpha", where), where + ".valpha", static_cast<int>(h.tate.m.size()));
        h.tate.vbeta = parse_vec(field(j, "vbeta", where), where + ".vbeta", static_cast<int>(h.tate.n.size()));
    } else if (type == "family") {
        h.family = true;
        auto& P = h.params;
        P.c = parse_int(field(j, "c", where), where + ".c");
        P.cp = parse_int(field(j, "cp", where), where + ".cp");
        P.a = parse_ints(field(j, "a", where), where + ".a");
        P.ap = parse_ints(field(j, "ap", where), where + ".ap");
        P.b = parse_ints(field(j, "b", where), where + ".b");
        P.bp = parse_ints(field(j, "bp", where), where + ".bp");
        P.m = parse_ints(field(j, "m", where), where + ".m");
        P.n = parse_ints(field(j, "n", where), where + ".n");
        if (j.contains("d") != j.contains("dp")) throw SchemaError(where + ": give both d and dp or neither");
        if (j.contains("d")) {
            P.d = parse_int_grid(j.at("d"), where + ".d");
            P.dp = parse_int_grid(j.at("dp"), where + ".dp");
        } else {
            h.derive_theta = true;
        }
    } else {
        throw SchemaError(where + ".type: expected tate|family");
    }
    return h;
}

inline json height_json(const HeightSpec& h) {
    if (!h.family)
        return {{"type", "tate"}, {"vq", rational_json(h.tate.vq)}, {"m", h.tate.m}, {"n", h.tate.n},
                {"valpha", vec_json(h.tate.valpha)}, {"vbeta", vec_json(h.tate.vbeta)}};
    const auto& P = h.params;
    json j{{"type", "family"}, {"c", P.c}, {"cp", P.cp}, {"a", P.a}, {"ap", P.ap}, {"b", P.b}, {"bp", P.bp}, {"m", P.m}, {"n", P.n}};
    if (!h.derive_theta) {
        j["d"] = P.d;
        j["dp"] = P.dp;
    }
    return j;
}

inline json normalize_args(const Task& t) {
    json a = t.args;
    if (t.kind == "eigen") {
        if (a.contains("relation")) a["relation"] = vec_json(parse_vec(a["relation"], "relation", 4));
        if (a.contains("triple")) a["triple"]["q"] = rational_json(parse_rational(a["triple"]["q"], "q"));
    }
    return a;
}

}  // namespace detail

inline Scenario parse_scenario(const json& j) {
    if (!j.is_object()) throw SchemaError("scenario: expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        static const std::set<std::string> known{"schema", "field", "filtrations", "operators", "splittings", "cones",
                                                 "actions", "ratio_points", "bases", "heights", "tasks"};
        if (!known.count(it.key())) throw SchemaError("scenario: unknown key '" + it.key() + "'");
    }
    if (j.contains("schema") && j.at("schema") != kScenarioSchema)
        throw SchemaError("scenario: unsupported schema " + j.at("schema").dump());
    Scenario S;
    if (j.contains("field")) {
        S.field = parse_name(j.at("field"), "field");
        if (S.field != "Q" && S.field != "Q(y)") throw SchemaError("field: expected \"Q\" or \"Q(y)\"");
    }
    auto section = [&](const char* key) -> json {
        if (!j.contains(key)) return json::object();
        if (!j.at(key).is_object()) throw SchemaError(std::string(key) + ": expected an object of named entries");
        return j.at(key);
    };
    const json sec_filtrations = section("filtrations");
    for (auto& [nm, v] : sec_filtrations.items()) S.filtrations[nm] = parse_filtration(v, "filtrations." + nm);
    const json sec_operators = section("operators");
    for (auto& [nm, v] : sec_operators.items()) {
        std::string w = "operators." + nm;
        std::vector<Matrix<Rational>> cs;
        if (v.is_object()) {
            if (!S.over_y()) throw SchemaError(w + ": polynomial operators need field Q(y)");
            const json& p = field(v, "poly", w);
            if (!p.is_array() || p.empty()) throw SchemaError(w + ".poly: expected a nonempty list of matrices");
            for (std::size_t i = 0; i < p.size(); ++i) cs.push_back(parse_matrix(p[i], w + ".poly[" + std::to_string(i) + "]"));
        } else {
            cs.push_back(parse_matrix(v, w));
        }
        for (auto& m : cs)
            if (!m.square() || m.rows() != cs[0].rows()) throw SchemaError(w + ": expected square matrices of one size");
        S.operators[nm] = cs;
    }
    const json sec_splittings = section("splittings");
    for (auto& [nm, v] : sec_splittings.items()) {
        auto m = parse_matrix(v, "splittings." + nm);
        if (!m.square()) throw SchemaError("splittings." + nm + ": expected a square matrix");
        S.splittings[nm] = m;
    }
    const json sec_cones = section("cones");
    for (auto& [nm, v] : sec_cones.items()) {
        std::string w = "cones." + nm;
        int n = parse_int(field(v, "dim", w), w + ".dim");
        const json& g = field(v, "generators", w);
        if (!g.is_array()) throw SchemaError(w + ".generators: expected a list");
        std::vector<Vec> gens;
        for (std::size_t i = 0; i < g.size(); ++i) {
            gens.push_back(parse_vec(g[i], w + ".generators[" + std::to_string(i) + "]", n));
            if (std::all_of(gens.back().begin(), gens.back().end(), [](const Rational& x) { return x.is_zero(); }))
                throw SchemaError(w + ": zero generator");
        }
        S.cones[nm] = Cone(n, gens);
    }
    const json sec_actions = section("actions");
    for (auto& [nm, v] : sec_actions.items()) {
        std::string w = "actions." + nm;
        ActionSpec A;
        detail::need(S.cones, v, "cone", w, "cone");
        detail::need(S.filtrations, v, "W", w, "filtration");
        detail::need(S.splittings, v, "Y", w, "splitting");
        A.cone = v.at("cone").get<std::string>();
        A.W = v.at("W").get<std::string>();
        A.Y = v.at("Y").get<std::string>();
        int n = S.filtrations.at(A.W).ambient();
        int g = S.cones.at(A.cone).num_generators();
        detail::need_list(S.operators, v, "images", w, "operator", g, g);
        for (auto& x : v.at("images")) {
            A.images.push_back(x.get<std::string>());
            detail::check_constant(S, A.images.back(), w);
            if (detail::op_dim(S, A.images.back()) != n) throw SchemaError(w + ": image of the wrong dimension");
        }
        if (S.splittings.at(A.Y).rows() != n) throw SchemaError(w + ": splitting of the wrong dimension");
        S.actions[nm] = A;
    }
    auto flag_of = [](const json& v, const std::string& w) {
        const json& f = field(v, "flag", w);
        if (!f.is_array()) throw SchemaError(w + ".flag: expected a list of faces");
        std::vector<Face> fl;
        for (auto& x : f) fl.push_back(parse_face(x, w + ".flag"));
        return fl;
    };
    const json sec_ratio_points = section("ratio_points");
    for (auto& [nm, v] : sec_ratio_points.items()) {
        std::string w = "ratio_points." + nm;
        detail::need(S.cones, v, "cone", w, "cone");
        PointSpec P;
        P.cone = v.at("cone").get<std::string>();
        P.point.sigma = S.cones.at(P.cone);
        P.point.flag = flag_of(v, w);
        const json& r = field(v, "reps", w);
        if (!r.is_array()) throw SchemaError(w + ".reps: expected a list of vectors");
        for (auto& x : r) P.point.reps.push_back(parse_vec(x, w + ".reps", P.point.sigma.ambient()));
        try {
            P.point.validate();
        } catch (const std::invalid_argument& e) {
            throw SchemaError(w + ": " + e.what());
        }
        S.points[nm] = P;
    }
    const json sec_bases = section("bases");
    for (auto& [nm, v] : sec_bases.items()) {
        std::string w = "bases." + nm;
        detail::need(S.cones, v, "cone", w, "cone");
        BaseSpec B;
        B.cone = v.at("cone").get<std::string>();
        B.base.sigma = S.cones.at(B.cone);
        B.base.flag = flag_of(v, w);
        const json& el = field(v, "elems", w);
        if (!el.is_array()) throw SchemaError(w + ".elems: expected a list of levels");
        for (auto& lvl : el) {
            if (!lvl.is_array()) throw SchemaError(w + ".elems: expected a list of vectors per level");
            B.base.elems.emplace_back();
            for (auto& x : lvl) B.base.elems.back().push_back(parse_vec(x, w + ".elems", B.base.sigma.ambient()));
        }
        try {
            B.base.validate();
        } catch (const std::invalid_argument& e) {
            throw SchemaError(w + ": " + e.what());
        }
        S.bases[nm] = B;
    }
    const json sec_heights = section("heights");
    for (auto& [nm, v] : sec_heights.items()) S.heights[nm] = detail::parse_height(v, "heights." + nm);
    if (j.contains("tasks")) {
        const json& ts = j.at("tasks");
        if (!ts.is_array()) throw SchemaError("tasks: expected a list");
        for (std::size_t i = 0; i < ts.size(); ++i) {
            std::string w = "tasks[" + std::to_string(i) + "]";
            Task t;
            t.kind = parse_name(field(ts[i], "task", w), w + ".task");
            t.args = ts[i];
            t.args.erase("task");
            detail::check_task(S, t, w);
            S.tasks.push_back(std::move(t));
        }
    }
    return S;
}

inline json serialize_scenario(const Scenario& S) {
    json j{{"schema", kScenarioSchema}, {"field", S.field}};
    auto put = [&](const char* key, json v) {
        if (!v.empty()) j[key] = std::move(v);
    };
    json f = json::object(), o = json::object(), y = json::object(), c = json::object(), a = json::object();
    json p = json::object(), b = json::object(), h = json::object();
    for (auto& [nm, W] : S.filtrations) f[nm] = filtration_json(W);
    for (auto& [nm, cs] : S.operators) {
        if (cs.size() == 1) {
            o[nm] = matrix_json(cs[0]);
        } else {
            json l = json::array();
            for (auto& m : cs) l.push_back(matrix_json(m));
            o[nm] = {{"poly", l}};
        }
    }
    for (auto& [nm, Y] : S.splittings) y[nm] = matrix_json(Y);
    for (auto& [nm, C] : S.cones) {
        json g = json::array();
        for (auto& v : C.generators()) g.push_back(vec_json(v));
        c[nm] = {{"dim", C.ambient()}, {"generators", g}};
    }
    for (auto& [nm, A] : S.actions) a[nm] = {{"cone", A.cone}, {"images", A.images}, {"W", A.W}, {"Y", A.Y}};
    for (auto& [nm, P] : S.points) {
        json reps = json::array();
        for (auto& v : P.point.reps) reps.push_back(vec_json(v));
        p[nm] = {{"cone", P.cone}, {"flag", P.point.flag}, {"reps", reps}};
    }
    for (auto& [nm, B] : S.bases) {
        json el = json::array();
        for (auto& lvl : B.base.elems) {
            json l = json::array();
            for (auto& v : lvl) l.push_back(vec_json(v));
            el.push_back(l);
        }
        b[nm] = {{"cone", B.cone}, {"flag", B.base.flag}, {"elems", el}};
    }
    for (auto& [nm, H] : S.heights) h[nm] = detail::height_json(H);
    put("filtrations", f);
    put("operators", o);
    put("splittings", y);
    put("cones", c);
    put("actions", a);
    put("ratio_points", p);
    put("bases", b);
    put("heights", h);
    json ts = json::array();
    for (auto& t : S.tasks) {
        json x = detail::normalize_args(t);
        x["task"] = t.kind;
        ts.push_back(x);
    }
    j["tasks"] = ts;
    return j;
}

// ---------------------------------------------------------------------------
// running

struct Options {
    int order = 8;
    std::string flavor = "standard";
    unsigned seed = 1;
    std::optional<std::string> only;  // run only tasks of this kind
    std::optional<std::string> inject_fault;
};

// --order beats MSLAB_ORDER, which beats 8
inline int default_order(std::optional<int> flag) {
    if (flag) return *flag;
    if (const char* e = std::getenv("MSLAB_ORDER")) {
        try {
            std::size_t used = 0;
            int k = std::stoi(e, &used);
            if (used == std::string(e).size() && k >= 0) return k;
        } catch (const std::exception&) {
        }
    }
    return 8;
}

struct TaskResult {
    json out;
    int code = kPass;
    bool hard = false;
};

namespace detail {

inline int task_order(const json& a, const Options& o) { return a.contains("order") ? a.at("order").get<int>() : o.order; }

inline Matrix<Rational> constant_op(const Scenario& S, const std::string& nm) { return S.operators.at(nm)[0]; }

inline Matrix<RationalFunction> poly_op(const Scenario& S, const std::string& nm) {
    const auto& cs = S.operators.at(nm);
    int n = cs[0].rows();
    Matrix<RationalFunction> M(n, n);
    RationalFunction yk = 1, y = RationalFunction::y();
    for (auto& c : cs) {
        M += yk * embed<RationalFunction>(c);
        yk = yk * y;
    }
    return M;
}

inline std::string op_name(const json& a, const char* key) { return a.at(key).get<std::string>(); }

inline std::string witness_filtration(const Filtration<Rational>& W) { return filtration_json(W).dump(); }

// W^0 = W, W^j = M(N_j, W^{j-1})
inline std::vector<Filtration<Rational>> relative_chain(const Filtration<Rational>& W, const std::vector<Matrix<Rational>>& Ns) {
    std::vector<Filtration<Rational>> out{W};
    for (std::size_t j = 0; j < Ns.size(); ++j) {
        auto M = relative_monodromy_filtration(Ns[j], out.back());
        if (!M)
            throw NotExistsError("relative monodromy filtration M(N_" + std::to_string(j + 1) + ", W^" + std::to_string(j) + ") does not exist",
                                 "N_" + std::to_string(j + 1) + " = " + Ns[j].str() + "; W^" + std::to_string(j) + " = " + witness_filtration(out.back()));
        out.push_back(*M);
    }
    return out;
}

inline std::vector<Matrix<Rational>> op_list(const Scenario& S, const json& a) {
    std::vector<Matrix<Rational>> Ns;
    for (auto& x : a.at("N")) Ns.push_back(constant_op(S, x.get<std::string>()));
    return Ns;
}

inline DeligneSystemData deligne_data(const Scenario& S, const json& a) {
    DeligneSystemData D;
    const auto& W = S.filtrations.at(a.at("W").get<std::string>());
    D.dim = W.ambient();
    D.N = op_list(S, a);
    D.W = relative_chain(W, D.N);
    D.Y = S.splittings.at(a.at("Y").get<std::string>());
    return D;
}

inline ConeAction action_of(const Scenario& S, const std::string& nm) {
    const auto& A = S.actions.at(nm);
    ConeAction C;
    C.sigma = S.cones.at(A.cone);
    for (auto& x : A.images) C.images.push_back(constant_op(S, x));
    C.W = S.filtrations.at(A.W);
    C.Y = S.splittings.at(A.Y);
    return C;
}

inline json coefficients_json(const Coefficients& c) {
    json j = json::object();
    for (auto& [k, m] : c) j[std::to_string(k)] = matrix_json(m);
    return j;
}

inline TaskResult from_checks(json out, const std::vector<CheckLine>& cs) {
    TaskResult r;
    bool ok = all_pass(cs);
    out["checks"] = checks_json(cs);
    out["status"] = ok ? "pass" : "fail";
    r.out = std::move(out);
    r.code = ok ? kPass : kFail;
    return r;
}

inline json delta_json(const GradedMap<Rational>& d) {
    json blocks = json::array();
    std::set<int> ws(d.weight.begin(), d.weight.end());
    for (int t : ws)
        for (int s : ws) {
            auto b = d.block(t, s);
            if (!b.is_zero()) blocks.push_back({{"target", t}, {"source", s}, {"matrix", matrix_json(b)}});
        }
    return {{"weights", d.weight}, {"matrix", matrix_json(d.m)}, {"blocks", blocks}};
}

inline json delta_json(const GradedMap<RationalFunction>& d) {
    json blocks = json::array();
    std::set<int> ws(d.weight.begin(), d.weight.end());
    for (int t : ws)
        for (int s : ws) {
            auto b = d.block(t, s);
            if (!b.is_zero()) blocks.push_back({{"target", t}, {"source", s}, {"matrix", matrix_json(b)}});
        }
    return {{"weights", d.weight}, {"matrix", matrix_json(d.m)}, {"blocks", blocks}};
}

inline TaskResult run_validate(const Scenario& S, const json& a) {
    json out;
    if (a.contains("action")) {
        auto M = validate_monodromy_system(action_of(S, a.at("action").get<std::string>()));
        out["admissibility"] = admissibility_label();
        return from_checks(out, M.report);
    }
    const auto& W = S.filtrations.at(a.at("W").get<std::string>());
    auto Ns = op_list(S, a);
    std::vector<CheckLine> pre;
    for (std::size_t j = 0; j < Ns.size(); ++j) {
        std::string nj = "N" + std::to_string(j + 1);
        pre.push_back({nj + " nilpotent", is_nilpotent(Ns[j]), is_nilpotent(Ns[j]) ? "" : Ns[j].str()});
        pre.push_back({nj + " preserves W", preserves(Ns[j], W), preserves(Ns[j], W) ? "" : Ns[j].str()});
    }
    if (!all_pass(pre)) return from_checks(out, pre);
    auto chain = relative_chain(W, Ns);
    json fs = json::array();
    for (std::size_t j = 1; j < chain.size(); ++j) fs.push_back(filtration_json(chain[j]));
    out["relative_filtrations"] = fs;
    if (!a.contains("Y")) return from_checks(out, pre);
    DeligneSystemData D{W.ambient(), chain, Ns, S.splittings.at(a.at("Y").get<std::string>())};
    auto cs = validate_deligne_data(D);
    return from_checks(out, cs);
}

template <class F>
json split_json(const SplDelta<F>& r) {
    return {{"Y0", matrix_json(r.Y0.Y)}, {"Y0_spectrum", r.Y0.spectrum}, {"u", matrix_json(r.u)}};
}

inline TaskResult run_split_delta(const Scenario& S, const json& a, bool delta) {
    const auto& W = S.filtrations.at(a.at("W").get<std::string>());
    const auto& Y = S.splittings.at(a.at("Y").get<std::string>());
    std::string nm = op_name(a, "N");
    json out;
    std::vector<CheckLine> cs;
    if (S.operators.at(nm).size() == 1) {
        Matrix<Rational> N = constant_op(S, nm);
        auto M = relative_chain(W, {N})[1];
        SplitOptions opt;
        opt.known_relative = M;
        auto r = deligne_splitting(W, N, Y, opt);
        out["relative_filtration"] = filtration_json(M);
        if (delta) {
            out["delta"] = delta_json(r.delta);
            cs.push_back({"delta in W_{-2}", r.delta.in_weight(-2), ""});
        } else {
            out["splitting"] = split_json(r);
            cs.push_back({"Y0 splits W", splits(r.Y0.Y, W), ""});
            cs.push_back({"[Y0, Y] = 0", commutator(r.Y0.Y, Y).is_zero(), ""});
        }
    } else {
        auto r = deligne_splitting(W, poly_op(S, nm), Y);
        if (delta) {
            out["delta"] = delta_json(r.delta);
            cs.push_back({"delta in W_{-2}", r.delta.in_weight(-2), ""});
        } else {
            out["splitting"] = split_json(r);
        }
    }
    return from_checks(out, cs);
}

inline TaskResult run_descend(const Scenario& S, const json& a) {
    auto D = deligne_data(S, a);
    auto cs = validate_deligne_data(D);
    json out;
    if (!all_pass(cs)) return from_checks(out, cs);
    auto ys = descend_splittings(D);
    json l = json::array();
    for (auto& y : ys) l.push_back(matrix_json(y.Y));
    out["splittings"] = l;
    return from_checks(out, cs);
}

inline bool bounds_vacuous(const ExpansionReport& R) { return std::max(R.twisted_complete_u, R.twisted_complete_delta) < 1; }

inline TaskResult run_expand(const Scenario& S, const json& a, const Options& o) {
    int order = task_order(a, o);
    std::string mode = a.contains("mode") ? a.at("mode").get<std::string>() : "one_var";
    json out{{"mode", mode}, {"order", order}};
    if (mode == "multi") {
        auto M = validate_monodromy_system(action_of(S, a.at("action").get<std::string>()));
        if (!M.valid) return from_checks(out, M.report);
        auto ctx = twist_context(M, S.bases.at(a.at("base").get<std::string>()).base, S.points.at(a.at("point").get<std::string>()).point);
        auto tw = torus_twist(ctx);
        std::vector<CheckLine> cs{{"twisted family denominator-free", tw.denominator_free, ""}};
        for (auto& x : tw.offending) cs.back().witness += (cs.back().witness.empty() ? "" : "; ") + x;
        Matrix<Rational> lim = twist_limit(ctx);
        Matrix<Rational> at = tw.Ny.evaluate(encasement_values(ctx), Matrix<Rational>(lim.rows(), lim.cols()));
        cs.push_back({"evaluation equals N_1 + sum Nhat_j", at == lim, at == lim ? "" : at.str()});
        out["limit"] = matrix_json(lim);
        if (ctx.n() == 2) {
            auto mv = multi_var_expansion(ctx, order);
            for (auto& c : mv.checks) cs.push_back(c);
            for (std::size_t i = 0; i < mv.expansions.size(); ++i)
                for (auto& c : mv.expansions[i].checks) cs.push_back({"sample " + std::to_string(i) + ": " + c.name, c.pass, c.witness});
            out["samples"] = mv.expansions.size();
            out["starred_applicable"] = mv.starred_applicable;
        }
        return from_checks(out, cs);
    }
    const auto& W = S.filtrations.at(a.at("W").get<std::string>());
    auto Ns = op_list(S, a);
    auto sys = one_var_system(W, Ns[0], Ns[1], S.splittings.at(a.at("Y").get<std::string>()));
    ExpansionReport R = mode == "mild" ? mild_one_var(sys, order) : one_var_expansion(sys, order);
    std::vector<CheckLine> cs = R.checks;
    if (mode == "one_var") {
        auto b = verify_twisted_weight_bounds(R);
        cs.insert(cs.end(), b.begin(), b.end());
        out["bounds_vacuous"] = bounds_vacuous(R);
    }
    out["statement"] = R.statement;
    out["graded_weights"] = R.graded_weights;
    out["delta_coefficients"] = coefficients_json(R.delta);
    out["u_coefficients"] = coefficients_json(R.u);
    out["twisted_complete_u"] = R.twisted_complete_u;
    out["twisted_complete_delta"] = R.twisted_complete_delta;
    return from_checks(out, cs);
}

inline TaskResult run_heights(const Scenario& S, const json& a, const Options& o) {
    HeightSpec H = S.heights.at(a.at("input").get<std::string>());
    json out;
    std::vector<CheckLine> cs;
    if (!H.family) {
        Rational lh = local_height(H.tate);
        auto D = height_pairing_system(H.tate);
        auto r = deligne_splitting(D.W[0], D.N[0], D.Y);
        Rational d = r.delta.block(-2, 0)(0, 0);
        out["local_height"] = rational_json(lh);
        out["delta"] = rational_json(d);
        cs.push_back({"delta_W equals local height", d == lh, d.str() + " vs " + lh.str()});
        return from_checks(out, cs);
    }
    int order = task_order(a, o);
    if (H.derive_theta) fill_theta_exponents(H.params);
    auto e = height_asymptotics(H.params, order);
    out["order"] = order;
    out["delta"] = rf_json(e.delta);
    out["slope"] = rational_json(e.slope);
    out["expected_slope"] = rational_json(e.expected_slope);
    json ser = json::object();
    for (int k = 1; k >= e.series.lowest_power(); --k) ser[std::to_string(k)] = rational_json(e.series.coefficient(k));
    out["series"] = ser;
    cs.push_back({"delta matches closed form", e.oracle_match, rf_json(e.delta).dump()});
    cs.push_back({"slope equals d - ab/c", e.slope == e.expected_slope, e.slope.str() + " vs " + e.expected_slope.str()});
    cs.push_back({"no powers above y", e.shape_ok, ""});
    return from_checks(out, cs);
}

inline TaskResult run_ratio(const Scenario& S, const json& a, const Options& o) {
    const auto& p = S.points.at(a.at("point").get<std::string>()).point;
    const auto& psi = S.bases.at(a.at("base").get<std::string>()).base;
    std::string fl = a.contains("flavor") ? a.at("flavor").get<std::string>() : o.flavor;
    json out{{"flavor", fl}};
    std::vector<CheckLine> cs;
    auto enc = encased_in(p, psi);
    out["encased"] = enc.has_value();
    if (enc) {
        json c = json::array();
        for (auto& lvl : *enc) c.push_back(vec_json(lvl));
        out["encasement"] = c;
    }
    auto m = u_membership(psi, p);
    out["in_chart"] = m.has_value();
    if (m) {
        auto cc = chart_coords(psi, p, fl == "narrower" ? ChartFlavor::Narrower : ChartFlavor::Standard);
        json bd = json::array(), bv = json::array(), rs = json::array();
        for (std::size_t j = 0; j < cc.boundary.size(); ++j) {
            bd.push_back(rational_json(cc.boundary[j]));
            auto v = cc.boundary_value(static_cast<int>(j));
            bv.push_back(v ? json(rational_json(*v)) : json(nullptr));
        }
        for (auto& [jk, v] : cc.ratios) rs.push_back({{"j", jk.first}, {"k", jk.second}, {"value", rational_json(v)}});
        out["boundary_ratios"] = bd;
        out["boundary_coordinates"] = bv;
        out["interior_ratios"] = rs;
        bool rt = chart_point(psi, cc).equivalent(p);
        cs.push_back({"chart round trip", rt, ""});
    }
    return from_checks(out, cs);
}

inline TaskResult run_eigen(const Scenario& S, const json& a) {
    json out;
    if (a.contains("triple")) {
        const json& t = a.at("triple");
        MonodromyTriple T{constant_op(S, op_name(t, "N0")), constant_op(S, op_name(t, "N1")), constant_op(S, op_name(t, "N2")),
                          constant_op(S, op_name(t, "F")), parse_rational(t.at("q"), "q")};
        auto r = validate_triple(T);
        out["normalization"] = normalization_name(r.normalization);
        if (r.normalization == Normalization::Needed) {
            out["kappa"] = rational_json(r.kappa);
            out["shift"] = rational_json(r.shift);
            out["N1_normalized"] = matrix_json(r.N1_normalized);
        }
        out["normalization_checks"] = checks_json(r.normalization_checks);
        return from_checks(out, r.checks);
    }
    auto rel = parse_vec(a.at("relation"), "relation", 4);
    QuadraticRelation R{rel[0], rel[1], rel[2], rel[3], constant_op(S, op_name(a, "A")), constant_op(S, op_name(a, "B"))};
    EigenCase k = parse_case(a.at("case").get<std::string>());
    auto rep = common_eigenvector_report(R, k);
    out["case"] = case_name(k);
    out["eigenvector"] = vec_json(rep.v);
    out["lambda"] = rational_json(rep.lambda);
    out["mu"] = rational_json(rep.mu);
    if (k == EigenCase::I) {
        out["scale"] = rational_json(rep.scale);
        out["alpha"] = rational_json(rep.alpha);
        out["beta"] = rational_json(rep.beta);
        out["gamma"] = rational_json(rep.gamma);
        out["delta"] = rational_json(rep.delta);
        out["nilpotency_index"] = rep.nil_index;
    }
    return from_checks(out, rep.checks);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// selftest

struct SuiteFailure {
    std::string instance, check, witness;
};

inline json suite_json(const std::string& name, int instances, int passed, const std::vector<SuiteFailure>& fails,
                       const std::optional<std::vector<std::string>>& vacuous = std::nullopt) {
    json f = json::array();
    for (auto& x : fails) f.push_back({{"instance", x.instance}, {"check", x.check}, {"witness", x.witness}});
    json j{{"suite", name}, {"instances", instances}, {"passed", passed}, {"failures", f}, {"status", fails.empty() ? "pass" : "fail"}};
    if (vacuous) {
        j["vacuous"] = vacuous->size();
        j["vacuous_instances"] = *vacuous;
    }
    return j;
}

namespace detail {

inline void collect(std::vector<SuiteFailure>& out, const std::string& inst, const std::vector<CheckLine>& cs, int& passed) {
    bool ok = true;
    for (auto& c : cs)
        if (!c.pass) {
            out.push_back({inst, c.name, c.witness});
            ok = false;
        }
    passed += ok;
}

inline json selftest_deligne(unsigned seed, bool fault) {
    std::mt19937 rng(seed);
    std::vector<SuiteFailure> fails;
    int passed = 0, count = 0;
    for (int t = 0; t < 10; ++t) {
        int n = 1 + t % 3;
        auto R = gen::representation(gen::random_irreps(n, 8, rng));
        auto D = t % 2 ? gen::perturbed_system(R, rng) : gen::split_system(R);
        D = gen::conjugate(D, gen::random_unipotent(D.W[0], rng));
        std::string lbl = std::string(t % 2 ? "perturbed" : "split") + "#" + std::to_string(t);
        std::vector<CheckLine> cs = validate_deligne_data(D);
        if (all_pass(cs)) {
            auto ps = verify_deligne_props(D);
            cs.insert(cs.end(), ps.begin(), ps.end());
            auto ys = descend_splittings(D);
            Matrix<Rational> want = fault ? D.Y + Matrix<Rational>::identity(D.dim) : D.Y;
            cs.push_back({"descent starts at Y", ys.back().Y == want, ys.back().Y.str()});
        }
        collect(fails, lbl, cs, passed);
        ++count;
    }
    return suite_json("deligne", count, passed, fails);
}

inline json selftest_sl2orbit(unsigned seed, int order, bool fault) {
    std::vector<SuiteFailure> fails;
    int passed = 0;
    std::vector<std::string> vacuous;
    auto insts = inst::one_var_instances(8, seed);
    for (auto& in : insts) {
        auto R = one_var_expansion(in.system, order);
        std::vector<CheckLine> cs = R.checks;
        auto b = verify_twisted_weight_bounds(R);
        cs.insert(cs.end(), b.begin(), b.end());
        if (bounds_vacuous(R)) vacuous.push_back(in.label);
        // leading delta coefficient, recomputed from Y^1 with the relative filtration rebuilt
        auto d0 = deligne_splitting(in.system.W(), in.system.N1(), in.system.ys[1]).delta.m;
        if (fault) d0 = d0 + Matrix<Rational>::identity(d0.rows());
        Matrix<Rational> lead = coefficient_or_zero(R.delta, -1, d0.rows());
        cs.push_back({"delta_{-1} = delta_W(N_1)", lead == d0, lead == d0 ? "" : lead.str() + " vs " + d0.str()});
        collect(fails, in.label, cs, passed);
    }
    return suite_json("sl2orbit", static_cast<int>(insts.size()), passed, fails, vacuous);
}

inline json selftest_heights(unsigned seed, int order, bool fault) {
    std::mt19937 rng(seed);
    std::vector<SuiteFailure> fails;
    int passed = 0, count = 0;
    for (int t = 0; t < 20; ++t, ++count) {
        auto in = inst::random_tate_input(rng);
        auto D = height_pairing_system(in);
        Rational d = deligne_splitting(D.W[0], D.N[0], D.Y).delta.block(-2, 0)(0, 0);
        Rational lh = local_height(in) + (fault ? Rational(1) : Rational(0));
        collect(fails, "tate#" + std::to_string(t), {{"delta_W equals local height", d == lh, d.str() + " vs " + lh.str()}}, passed);
    }
    for (int t = 0; t < 10; ++t, ++count) {
        auto e = height_asymptotics(inst::random_pair_family(rng), order);
        collect(fails, "family#" + std::to_string(t),
                {{"delta matches closed form", e.oracle_match, ""},
                 {"slope equals d - ab/c", e.slope == e.expected_slope, e.slope.str() + " vs " + e.expected_slope.str()},
                 {"no powers above y", e.shape_ok, ""}},
                passed);
    }
    return suite_json("heights", count, passed, fails);
}

inline json selftest_eigen(unsigned seed, bool fault) {
    std::vector<SuiteFailure> fails;
    int passed = 0, count = 0;
    for (EigenCase k : {EigenCase::I, EigenCase::II, EigenCase::III})
        for (auto& in : inst::eigen_instances(k, 10, seed)) {
            ++count;
            auto R = in.R;
            std::vector<CheckLine> cs;
            try {
                auto rep = common_eigenvector_report(R, k);
                cs = rep.checks;
                if (fault) {
                    R.A(0, 0) += 1;
                    bool eig = mslab::detail::eigenvalue_on(R.A, rep.v).has_value();
                    cs.push_back({"v eigenvector of perturbed A", eig, vec_json(rep.v).dump()});
                }
            } catch (const std::exception& e) {
                cs.push_back({"common eigenvector", false, e.what()});
            }
            collect(fails, in.label, cs, passed);
        }
    return suite_json("eigen", count, passed, fails);
}

}  // namespace detail

inline json selftest(int order, unsigned seed, const std::optional<std::string>& fault = std::nullopt) {
    auto f = [&](const char* s) { return fault && *fault == s; };
    json suites = json::array();
    suites.push_back(detail::selftest_deligne(seed, f("deligne")));
    suites.push_back(detail::selftest_sl2orbit(seed, order, f("sl2orbit")));
    suites.push_back(detail::selftest_heights(seed, order, f("heights")));
    suites.push_back(detail::selftest_eigen(seed, f("eigen")));
    return suites;
}

// ---------------------------------------------------------------------------

inline TaskResult run_task(const Scenario& S, const Task& t, const Options& o) {
    TaskResult r;
    try {
        const json& a = t.args;
        if (t.kind == "validate") r = detail::run_validate(S, a);
        else if (t.kind == "split") r = detail::run_split_delta(S, a, false);
        else if (t.kind == "delta") r = detail::run_split_delta(S, a, true);
        else if (t.kind == "descend") r = detail::run_descend(S, a);
        else if (t.kind == "expand") r = detail::run_expand(S, a, o);
        else if (t.kind == "heights") r = detail::run_heights(S, a, o);
        else if (t.kind == "ratio") r = detail::run_ratio(S, a, o);
        else if (t.kind == "eigen") r = detail::run_eigen(S, a);
        else if (t.kind == "selftest") {
            int order = detail::task_order(a, o);
            std::optional<std::string> fault = o.inject_fault;
            if (a.contains("inject_fault")) fault = a.at("inject_fault").get<std::string>();
            json suites = selftest(order, o.seed, fault);
            bool ok = true;
            for (auto& s : suites) ok = ok && s["status"] == "pass";
            r.out = {{"order", order}, {"seed", o.seed}, {"suites", suites}, {"status", ok ? "pass" : "fail"}};
            r.code = ok ? kPass : kFail;
        }
    } catch (const NotExistsError& e) {
        r.out = {{"status", "not_exists"}, {"error", e.what()}, {"witness", e.witness}};
        r.code = kNotExists;
        r.hard = true;
    } catch (const GenericityViolation& e) {
        r.out = {{"status", "genericity_violation"}, {"error", e.what()}};
        r.code = kNotExists;
        r.hard = true;
    } catch (const PreconditionError& e) {
        bool ne = e.kind == PreconditionError::Kind::NoRelativeFiltration;
        r.out = {{"status", ne ? "not_exists" : "error"}, {"error", e.what()}, {"kind", to_string(e.kind)}};
        r.code = ne ? kNotExists : kFail;
        r.hard = true;
    } catch (const HypothesisError& e) {
        r.out = {{"status", "error"}, {"error", e.what()}, {"clause", e.clause}};
        r.code = kFail;
        r.hard = true;
    } catch (const SchemaError& e) {
        r.out = {{"status", "schema_error"}, {"error", e.what()}};
        r.code = kSchema;
        r.hard = true;
    } catch (const std::exception& e) {
        r.out = {{"status", "error"}, {"error", e.what()}};
        r.code = kFail;
        r.hard = true;
    }
    r.out["task"] = t.kind;
    return r;
}

struct RunResult {
    json report;
    int code = kPass;
};

inline json report_header(const std::string& input, const std::string& digest, const Options& o) {
    return {{"report_schema", kReportSchema},
            {"tool", "mslab"},
            {"version", kToolVersion},
            {"input", input},
            {"input_digest", "fnv1a64:" + digest},
            {"options", {{"order", o.order}, {"flavor", o.flavor}, {"seed", o.seed}}}};
}

inline RunResult run_scenario_text(const std::string& text, const std::string& label, const Options& o) {
    RunResult R;
    R.report = report_header(label, fnv1a_hex(text), o);
    Scenario S;
    try {
        json j = json::parse(text);
        S = parse_scenario(j);
    } catch (const json::exception& e) {
        R.report["error"] = std::string("parse error: ") + e.what();
        R.report["tasks"] = json::array();
        R.code = kSchema;
        R.report["exit_code"] = R.code;
        return R;
    } catch (const SchemaError& e) {
        R.report["error"] = std::string("schema error: ") + e.what();
        R.report["tasks"] = json::array();
        R.code = kSchema;
        R.report["exit_code"] = R.code;
        return R;
    }
    json tasks = json::array();
    bool aborted = false;
    int ran = 0;
    for (std::size_t i = 0; i < S.tasks.size(); ++i) {
        const Task& t = S.tasks[i];
        if (o.only && t.kind != *o.only) continue;
        ++ran;
        if (aborted) {
            tasks.push_back({{"task", t.kind}, {"index", i}, {"status", "skipped"}});
            continue;
        }
        auto r = run_task(S, t, o);
        r.out["index"] = i;
        tasks.push_back(r.out);
        R.code = std::max(R.code, r.code);
        aborted = r.hard;
    }
    if (o.only && ran == 0) {
        R.report["error"] = "schema error: scenario has no '" + *o.only + "' task";
        R.code = kSchema;
    }
    R.report["tasks"] = tasks;
    R.report["exit_code"] = R.code;
    return R;
}

inline std::optional<std::string> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) return std::nullopt;
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline RunResult run_scenario(const std::string& path, const Options& o) {
    std::string label = path.substr(path.find_last_of('/') == std::string::npos ? 0 : path.find_last_of('/') + 1);
    auto text = read_file(path);
    if (!text) {
        RunResult R;
        R.report = report_header(label, fnv1a_hex(""), o);
        R.report["error"] = "cannot read " + path;
        R.report["tasks"] = json::array();
        R.code = kSchema;
        R.report["exit_code"] = R.code;
        return R;
    }
    return run_scenario_text(*text, label, o);
}

// human-readable rendering of a report
inline std::string text_report(const json& rep) {
    std::ostringstream os;
    auto one = [&](const json& r) {
        os << "mslab " << r.value("version", "") << "  " << r.value("input", "") << "  " << r.value("input_digest", "") << "\n";
        if (r.contains("error")) os << "  " << r["error"].get<std::string>() << "\n";
        for (auto& t : r["tasks"]) {
            os << "  [" << t["index"].get<int>() << "] " << t["task"].get<std::string>() << ": " << t["status"].get<std::string>() << "\n";
            if (t.contains("error")) os << "      " << t["error"].get<std::string>() << "\n";
            if (t.contains("witness")) os << "      witness: " << t["witness"].get<std::string>() << "\n";
            if (t.contains("checks"))
                for (auto& c : t["checks"]) {
                    os << "      " << (c["pass"].get<bool>() ? "ok   " : "FAIL ") << c["name"].get<std::string>();
                    if (c.contains("witness")) os << "  (" << c["witness"].get<std::string>() << ")";
                    os << "\n";
                }
            if (t.contains("suites"))
                for (auto& s : t["suites"]) {
                    os << "      " << s["suite"].get<std::string>() << ": " << s["passed"].get<int>() << "/" << s["instances"].get<int>();
                    if (s.contains("vacuous")) os << " (bounds vacuous on " << s["vacuous"].get<int>() << ")";
                    os << "\n";
                    for (auto& f : s["failures"])
                        os << "        FAIL " << f["instance"].get<std::string>() << ": " << f["check"].get<std::string>() << "  ("
                           << f["witness"].get<std::string>() << ")\n";
                }
        }
        os << "  exit " << r["exit_code"].get<int>() << "\n";
    };
    if (rep.contains("batch"))
        for (auto& r : rep["batch"]) one(r);
    else
        one(rep);
    return os.str();
}

}  // namespace mslab::cli
