#include "biot/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace biot {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

int to_int(const std::string& s, int min) {
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size()) throw std::invalid_argument("expected an integer, got '" + s + "'");
    if (v < min) throw std::invalid_argument("must be at least " + std::to_string(min) + ", got " + s);
    return v;
}

double to_double(const std::string& s) {
    std::size_t pos = 0;
    double v = 0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (pos == 0 || pos != s.size() || !std::isfinite(v)) throw std::invalid_argument("expected a number, got '" + s + "'");
    return v;
}

double to_nonnegative(const std::string& s) {
    const double v = to_double(s);
    if (v < 0) throw std::invalid_argument("must be nonnegative, got " + s);
    return v;
}

bool to_bool(const std::string& s) {
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    throw std::invalid_argument("expected true or false, got '" + s + "'");
}

template <class E>
E choose(const std::string& s, std::initializer_list<std::pair<const char*, E>> options) {
    std::string names;
    for (const auto& [name, value] : options) {
        if (s == name) return value;
        names += names.empty() ? name : std::string(", ") + name;
    }
    throw std::invalid_argument("expected one of " + names + ", got '" + s + "'");
}

template <class E>
const char* name_of(E v, std::initializer_list<std::pair<const char*, E>> options) {
    for (const auto& [name, value] : options)
        if (v == value) return name;
    return "?";
}

const std::initializer_list<std::pair<const char*, Family>> kFlux{{"rt0", Family::RT0}, {"rt1", Family::RT1}};
const std::initializer_list<std::pair<const char*, Family>> kStress{{"p1", Family::P1}, {"p2", Family::P2}};
const std::initializer_list<std::pair<const char*, Pattern>> kPattern{{"crisscross", Pattern::crisscross},
                                                                      {"diagonal", Pattern::diagonal}};
const std::initializer_list<std::pair<const char*, InitialGuess>> kGuess{{"previous", InitialGuess::previous_step},
                                                                         {"zero", InitialGuess::zero}};
const std::initializer_list<std::pair<const char*, TuningMode>> kTuning{
    {"optimal", TuningMode::optimal}, {"classical", TuningMode::classical}, {"user", TuningMode::user}};
const std::initializer_list<std::pair<const char*, EtaMode>> kEta{{"contraction", EtaMode::contraction},
                                                                  {"lemma", EtaMode::lemma_Mq}};
const std::initializer_list<std::pair<const char*, bool>> kDenominator{{"squared", false}, {"stated", true}};
const std::initializer_list<std::pair<const char*, bool>> kBracket{{"stated", false}, {"derived", true}};
const std::initializer_list<std::pair<const char*, RunConfig::Indicators>> kIndicators{
    {"none", RunConfig::Indicators::none}, {"final", RunConfig::Indicators::final}, {"all", RunConfig::Indicators::all}};

const std::initializer_list<std::pair<const char*, MajorantOptions::PreviousData>> kPrevious{
    {"exact", MajorantOptions::PreviousData::exact}, {"discrete", MajorantOptions::PreviousData::discrete}};

using Setter = std::function<void(RunConfig&, const std::string&)>;

struct KeySpec {
    ConfigKey key;
    Setter set;
    std::function<std::string(const RunConfig&)> get;
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string cells_text(const std::vector<int>& cells) {
    std::string s;
    for (int n : cells) s += (s.empty() ? "1/" : ",1/") + std::to_string(n);
    return s;
}

std::string modes_text(const std::array<bool, kIterModes>& m) {
    std::string s;
    for (int k = 0; k < kIterModes; ++k)
        if (m[k]) s += (s.empty() ? "" : ",") + std::string(to_string(static_cast<IterMode>(k)));
    return s;
}

const std::vector<KeySpec>& specs() {
    static const std::vector<KeySpec> table = {
        {{"case", "problem", "manufactured case: ex1 or ex2"},
         [](RunConfig& c, const std::string& v) { c.case_name = parse_case(v); },
         [](const RunConfig& c) { return std::string(to_string(c.case_name)); }},
        {{"variant", "problem", "parameter set: simplified or realistic"},
         [](RunConfig& c, const std::string& v) { c.variant = parse_variant(v); },
         [](const RunConfig& c) { return std::string(to_string(c.variant)); }},
        {{"T", "problem", "final time (0: the case default)"},
         [](RunConfig& c, const std::string& v) { c.T = to_nonnegative(v); },
         [](const RunConfig& c) { return num(c.T); }},
        {{"h", "discretization", "mesh sizes, comma separated (e.g. 1/8,1/16)"},
         [](RunConfig& c, const std::string& v) {
             c.cells.clear();
             if (trim(v).empty()) return;
             for (const std::string& s : split(v, ',')) c.cells.push_back(parse_cells(s));
         },
         [](const RunConfig& c) { return cells_text(c.cells); }},
        {{"n-steps", "discretization", "number of time steps"},
         [](RunConfig& c, const std::string& v) { c.n_steps = to_int(v, 1); },
         [](const RunConfig& c) { return std::to_string(c.n_steps); }},
        {{"pattern", "discretization", "triangulation: crisscross or diagonal"},
         [](RunConfig& c, const std::string& v) { c.pattern = choose(v, kPattern); },
         [](const RunConfig& c) { return std::string(name_of(c.pattern, kPattern)); }},
        {{"iters", "solver", "fixed-stress iterations per step"},
         [](RunConfig& c, const std::string& v) { c.iters = to_int(v, 1); },
         [](const RunConfig& c) { return std::to_string(c.iters); }},
        {{"initial-guess", "solver", "first iterate of a step: previous or zero"},
         [](RunConfig& c, const std::string& v) { c.initial_guess = choose(v, kGuess); },
         [](const RunConfig& c) { return std::string(name_of(c.initial_guess, kGuess)); }},
        {{"tuning", "solver", "stabilization: optimal, classical or user"},
         [](RunConfig& c, const std::string& v) { c.tuning = choose(v, kTuning); },
         [](const RunConfig& c) { return std::string(name_of(c.tuning, kTuning)); }},
        {{"L", "solver", "stabilization parameter for tuning = user"},
         [](RunConfig& c, const std::string& v) { c.user_L = to_nonnegative(v); },
         [](const RunConfig& c) { return num(c.user_L); }},
        {{"rel-tol", "solver", "relative residual tolerance of the linear solves"},
         [](RunConfig& c, const std::string& v) { c.rel_tol = to_double(v); },
         [](const RunConfig& c) { return num(c.rel_tol); }},
        {{"eta-tol", "solver", "stop when the eta increment drops below (0: fixed count)"},
         [](RunConfig& c, const std::string& v) { c.eta_tol = to_nonnegative(v); },
         [](const RunConfig& c) { return num(c.eta_tol); }},
        {{"dual-flux", "majorant", "flux dual space: rt0 or rt1"},
         [](RunConfig& c, const std::string& v) { c.majorant.flux_family = choose(v, kFlux); },
         [](const RunConfig& c) { return std::string(name_of(c.majorant.flux_family, kFlux)); }},
        {{"dual-stress", "majorant", "stress dual space: p1 or p2"},
         [](RunConfig& c, const std::string& v) { c.majorant.stress_family = choose(v, kStress); },
         [](const RunConfig& c) { return std::string(name_of(c.majorant.stress_family, kStress)); }},
        {{"min-cycles", "majorant", "alternating minimization cycles"},
         [](RunConfig& c, const std::string& v) { c.majorant.cycles = to_int(v, 1); },
         [](const RunConfig& c) { return std::to_string(c.majorant.cycles); }},
        {{"iter-modes", "majorant", "iteration bounds: any of consecutive,lag,tilde"},
         [](RunConfig& c, const std::string& v) {
             std::array<bool, kIterModes> m{};
             for (const std::string& s : split(v, ',')) {
                 const auto k = choose<int>(s, {{"consecutive", 0}, {"lag", 1}, {"tilde", 2}});
                 m[k] = true;
             }
             c.majorant.modes = m;
         },
         [](const RunConfig& c) { return modes_text(c.majorant.modes); }},
        {{"lag-m", "majorant", "lag of the lag bound (0: ceil(iters / 2))"},
         [](RunConfig& c, const std::string& v) { c.majorant.lag_m = to_int(v, 0); },
         [](const RunConfig& c) { return std::to_string(c.majorant.lag_m); }},
        {{"eta-mode", "majorant", "eta discrepancy term: contraction or lemma"},
         [](RunConfig& c, const std::string& v) { c.majorant.eta_mode = choose(v, kEta); },
         [](const RunConfig& c) { return std::string(name_of(c.majorant.eta_mode, kEta)); }},
        {{"eta0", "majorant", "squared L2 distance of the initial eta to its discrete value"},
         [](RunConfig& c, const std::string& v) { c.majorant.eta0_discrepancy2 = to_nonnegative(v); },
         [](const RunConfig& c) { return num(c.majorant.eta0_discrepancy2); }},
        {{"denominator", "majorant", "iteration bound denominator: squared (1-x)^2 or stated 1-x^2"},
         [](RunConfig& c, const std::string& v) { c.majorant.iterative.stated_denominator = choose(v, kDenominator); },
         [](const RunConfig& c) { return std::string(name_of(c.majorant.iterative.stated_denominator, kDenominator)); }},
        {{"bracket", "majorant", "weights of the iteration bracket: stated or derived"},
         [](RunConfig& c, const std::string& v) { c.majorant.iterative.derived_bracket = choose(v, kBracket); },
         [](const RunConfig& c) { return std::string(name_of(c.majorant.iterative.derived_bracket, kBracket)); }},
        {{"chi", "majorant", "weight of the displacement bound (0: 1/lambda)"},
         [](RunConfig& c, const std::string& v) { c.majorant.chi = to_nonnegative(v); },
         [](const RunConfig& c) { return num(c.majorant.chi); }},
        {{"reuse", "majorant", "reuse the final iterate's factorizations for the other iterates"},
         [](RunConfig& c, const std::string& v) { c.majorant.reuse_schedule = to_bool(v); },
         [](const RunConfig& c) { return std::string(c.majorant.reuse_schedule ? "true" : "false"); }},
        {{"previous-data", "majorant", "previous-step fields in the flow residual: exact or discrete"},
         [](RunConfig& c, const std::string& v) { c.majorant.previous_data = choose(v, kPrevious); },
         [](const RunConfig& c) { return std::string(name_of(c.majorant.previous_data, kPrevious)); }},
        {{"out", "output", "output directory"},
         [](RunConfig& c, const std::string& v) { c.out = v; },
         [](const RunConfig& c) { return c.out; }},
        {{"vtk", "output", "also write VTK files of the final step"},
         [](RunConfig& c, const std::string& v) { c.vtk = to_bool(v); },
         [](const RunConfig& c) { return std::string(c.vtk ? "true" : "false"); }},
        {{"indicators", "output", "indicator dumps: none, final or all steps"},
         [](RunConfig& c, const std::string& v) { c.indicators = choose(v, kIndicators); },
         [](const RunConfig& c) { return std::string(name_of(c.indicators, kIndicators)); }},
    };
    return table;
}

const KeySpec* find_spec(const std::string& key) {
    for (const KeySpec& s : specs())
        if (s.key.name == key) return &s;
    return nullptr;
}

// Sections holding derived values; skipped on input.
bool output_only_section(const std::string& s) { return s == "constants"; }

std::string e4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4e", v);
    return buf;
}

std::string ratio_cell(double bound, double error) { return error > 0 ? e4(efficiency(bound, error)) : ""; }

class CsvWriter {
public:
    explicit CsvWriter(const std::vector<std::string>& header) : columns_(header.size()) { row(header); }
    void row(const std::vector<std::string>& cells) {
        if (cells.size() != columns_) throw std::logic_error("csv row width mismatch");
        for (std::size_t k = 0; k < cells.size(); ++k) os_ << (k ? "," : "") << cells[k];
        os_ << "\n";
    }
    std::string str() const { return os_.str(); }

private:
    std::size_t columns_;
    std::ostringstream os_;
};

std::string h_text(int cells) { return "1/" + std::to_string(cells); }

}  // namespace

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> k;
        for (const KeySpec& s : specs()) k.push_back(s.key);
        return k;
    }();
    return keys;
}

void set_config_value(RunConfig& c, const std::string& key, const std::string& value) {
    const KeySpec* s = find_spec(key);
    if (!s) throw ConfigError("", "unknown key '" + key + "'");
    s->set(c, trim(value));
}

int parse_cells(const std::string& h) {
    const std::string s = trim(h);
    if (s.empty()) throw std::invalid_argument("empty mesh size");
    const auto slash = s.find('/');
    if (slash != std::string::npos) {
        if (trim(s.substr(0, slash)) != "1") throw std::invalid_argument("mesh size must read 1/n, got '" + s + "'");
        return to_int(trim(s.substr(slash + 1)), 1);
    }
    const double v = to_double(s);
    if (!(v > 0 && v <= 1)) throw std::invalid_argument("mesh size must lie in (0, 1], got " + s);
    const double n = std::round(1.0 / v);
    if (std::abs(n * v - 1.0) > 1e-9) throw std::invalid_argument("1/h must be an integer, got h = " + s);
    return static_cast<int>(n);
}

std::vector<ConfigEntry> parse_config_text(const std::string& text, const std::string& source) {
    std::vector<ConfigEntry> out;
    std::istringstream is(text);
    std::string line, section;
    std::map<std::string, int> seen;
    for (int no = 1; std::getline(is, line); ++no) {
        const std::string where = source + ":" + std::to_string(no);
        std::string s = line;
        const auto hash = s.find_first_of("#;");
        if (hash != std::string::npos) s.erase(hash);
        s = trim(s);
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']') throw ConfigError(where, "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            bool known = output_only_section(section);
            for (const ConfigKey& k : config_keys()) known = known || k.section == section;
            if (!known) throw ConfigError(where, "unknown section [" + section + "]");
            continue;
        }
        if (output_only_section(section)) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(where, "expected 'key = value'");
        ConfigEntry e{trim(s.substr(0, eq)), trim(s.substr(eq + 1)), no};
        const KeySpec* spec = find_spec(e.key);
        if (!spec) throw ConfigError(where, "unknown key '" + e.key + "'");
        if (!section.empty() && spec->key.section != section)
            throw ConfigError(where, "key '" + e.key + "' belongs to section [" + spec->key.section + "]");
        if (auto it = seen.find(e.key); it != seen.end())
            throw ConfigError(where, "duplicate key '" + e.key + "' (first set on line " + std::to_string(it->second) + ")");
        seen[e.key] = no;
        out.push_back(std::move(e));
    }
    return out;
}

void apply_config(RunConfig& c, const std::vector<ConfigEntry>& entries, const std::string& source) {
    for (const ConfigEntry& e : entries) {
        try {
            set_config_value(c, e.key, e.value);
        } catch (const std::invalid_argument& err) {
            throw ConfigError(source + ":" + std::to_string(e.line), e.key + ": " + err.what());
        }
    }
}

void validate(const RunConfig& c) {
    if (c.cells.empty()) throw ConfigError("h", "empty sweep list: give at least one mesh size");
    if (c.n_steps < 1) throw ConfigError("n-steps", "must be positive");
    if (c.iters < 1) throw ConfigError("iters", "must be positive");
    if (c.majorant.cycles < 1) throw ConfigError("min-cycles", "must be positive");
    if (!(c.rel_tol > 0 && c.rel_tol < 1)) throw ConfigError("rel-tol", "must lie in (0, 1)");
    const auto& m = c.majorant.modes;
    if (!m[0] && !m[1] && !m[2]) throw ConfigError("iter-modes", "select at least one iteration bound");
    if (!m[2] && c.iters < 2) throw ConfigError("iter-modes", "consecutive and lag bounds need iters >= 2; add tilde");
    if (m[1] && c.majorant.lag_m >= c.iters) throw ConfigError("lag-m", "must be smaller than iters");
    if (c.tuning == TuningMode::user && !(c.user_L > 0)) throw ConfigError("L", "tuning = user needs L > 0");
    if (c.out.empty()) throw ConfigError("out", "output directory is required");
}

std::string config_text(const RunConfig& c) {
    std::ostringstream os;
    std::string section;
    for (const KeySpec& s : specs()) {
        if (s.key.section != section) {
            section = s.key.section;
            os << (os.tellp() > 0 ? "\n" : "") << "[" << section << "]\n";
        }
        os << s.key.name << " = " << s.get(c) << "\n";
    }
    return os.str();
}

PointResult run_point(const RunConfig& c, int cells, const StepSink& sink) {
    const auto start = std::chrono::steady_clock::now();
    ProblemDefinition P = manufactured_case(c.case_name, c.variant);
    if (c.T > 0) P.T = c.T;
    auto mesh = std::make_shared<const Mesh>(build_uniform_mesh({0, 0}, {1, 1}, cells, cells, c.pattern));
    PointResult out;
    out.cells = cells;
    out.n_steps = c.n_steps;
    out.constants = derived_constants(P.params, mesh->lo, mesh->hi, c.tuning, c.user_L);
    SolveControls lin;
    lin.rel_tolerance = c.rel_tol;
    Discretization d(P, mesh, TimeGrid(P.T, c.n_steps), out.constants, lin);
    out.tau = d.grid.tau();
    SolverControls sc;
    sc.max_iterations = c.iters;
    sc.initial_guess = c.initial_guess;
    sc.eta_tolerance = c.eta_tol;
    MajorantEvaluator ev(d, c.majorant);

    run_transient(d, sc, [&](const IterationHistory& h) {
        StepReport r = ev.evaluate_step(h);
        for (const IterationState& s : h.states) {
            if (s.i == 0) continue;
            IterationRow row;
            row.cells = cells;
            row.n = h.n;
            row.i = s.i;
            row.errors = exact_errors(s.p, s.u, P, h.t, h.tau);
            row.errors.per_cell_p.clear();
            row.errors.per_cell_u.clear();
            row.norm_p = r.norm_p;
            row.norm_u = r.norm_u;
            for (const IterateBounds& b : r.evaluated) {
                if (b.i != s.i) continue;
                row.bounded = true;
                row.Mh_p = b.pressure.total;
                row.Mh_p_l2 = b.pressure_l2;
                row.Mh_u = b.displacement.energy;
                row.Mh_u_div = b.displacement.div;
            }
            row.delta_eta = s.delta_eta_norm;
            if (s.i >= 2 && static_cast<std::size_t>(s.i - 2) < h.ratios.size()) row.ratio = h.ratios[s.i - 2];
            out.iterations.push_back(std::move(row));
        }
        for (const std::string& w : h.warnings) out.warnings.push_back(w);
        if (sink) sink(r, *mesh);
        out.acc.add(r);
        out.I = std::max(out.I, r.I);
        out.m = r.m;
        r.indicator_p.clear();
        r.indicator_u.clear();
        r.errors.per_cell_p.clear();
        r.errors.per_cell_u.clear();
        r.final_bounds.pressure.per_cell.clear();
        r.final_bounds.stress.per_cell.clear();
        for (IterateBounds& b : r.evaluated) {
            b.pressure.per_cell.clear();
            b.stress.per_cell.clear();
        }
        out.steps.push_back(std::move(r));
    });
    out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

std::string results_csv(const std::vector<PointResult>& points) {
    CsvWriter w({"h",          "N",         "tau",        "I",
                 "m",          "q",         "e_p",        "Mh_p",
                 "ieff_Mh_p",  "p_l2",      "Mh_p_l2",    "e_u",
                 "Mh_u",       "ieff_Mh_u", "div_l2",     "Mh_u_div",
                 "Mi_p_consecutive",        "Mi_p_lag",   "Mi_p_tilde",
                 "Mi_u_consecutive",        "Mi_u_lag",   "Mi_u_tilde",
                 "M_p",        "ieff_M_p",  "M_u",        "ieff_M_u",
                 "e_combined", "M",         "ieff_M",     "ieff_M_p_consecutive",
                 "ieff_M_u_consecutive",    "ieff_M_consecutive", "max_ratio"});
    for (const PointResult& p : points) {
        const Accumulated& a = p.acc;
        const bool cons = !p.steps.empty() && p.steps.front().iter_available[0];
        auto mode = [&](int k, bool pressure) {
            const bool avail = !p.steps.empty() && p.steps.front().iter_available[k];
            if (!avail) return std::string();
            return e4(pressure ? a.iter_p[k] / a.norm_p : a.iter_u[k] / a.norm_u);
        };
        w.row({h_text(p.cells),
               std::to_string(p.n_steps),
               e4(p.tau),
               std::to_string(p.I),
               std::to_string(p.m),
               e4(p.constants.q),
               e4(a.e_p / a.norm_p),
               e4(a.Mh_p / a.norm_p),
               ratio_cell(a.Mh_p, a.e_p),
               e4(a.p_l2 / a.norm_p),
               e4(a.Mh_p_l2 / a.norm_p),
               e4(a.e_u / a.norm_u),
               e4(a.Mh_u / a.norm_u),
               ratio_cell(a.Mh_u, a.e_u),
               e4(a.div_l2 / a.norm_u),
               e4(a.Mh_u_div / a.norm_u),
               mode(0, true),
               mode(1, true),
               mode(2, true),
               mode(0, false),
               mode(1, false),
               mode(2, false),
               e4(a.M_p / a.norm_p),
               ratio_cell(a.M_p, a.e_p),
               e4(a.M_u / a.norm_u),
               ratio_cell(a.M_u, a.e_u),
               e4(a.rel_combined()),
               e4(a.M / (a.norm_p + a.norm_u)),
               ratio_cell(a.M, a.combined),
               cons ? ratio_cell(a.M_p_consecutive, a.e_p) : "",
               cons ? ratio_cell(a.M_u_consecutive, a.e_u) : "",
               cons ? ratio_cell(a.M_consecutive, a.combined) : "",
               e4(a.max_ratio)});
    }
    return w.str();
}

std::string iterations_csv(const std::vector<PointResult>& points) {
    CsvWriter w({"h", "n", "i", "e_p", "Mh_p", "p_l2", "Mh_p_l2", "e_u", "Mh_u", "div_l2", "Mh_u_div", "div_lambda",
                 "delta_eta", "ratio"});
    for (const PointResult& p : points) {
        for (const IterationRow& r : p.iterations) {
            const double np = r.norm_p, nu = r.norm_u;
            auto bound = [&](double v, double n) { return r.bounded ? e4(v / n) : std::string(); };
            w.row({h_text(r.cells), std::to_string(r.n), std::to_string(r.i), e4(r.errors.e_p / np),
                   bound(r.Mh_p, np), e4(r.errors.p_l2 / np), bound(r.Mh_p_l2, np), e4(r.errors.e_u / nu),
                   bound(r.Mh_u, nu), e4(r.errors.div_l2 / nu), bound(r.Mh_u_div, nu),
                   e4(r.errors.div_lambda / nu), r.delta_eta >= 0 ? e4(r.delta_eta) : "",
                   r.ratio >= 0 ? e4(r.ratio) : ""});
        }
    }
    return w.str();
}

std::string table3_csv(const std::vector<PointResult>& points) {
    CsvWriter w({"h", "e_p", "M_p", "e_u", "M_u", "e_combined", "M", "ieff_M"});
    for (const PointResult& p : points) {
        const Accumulated& a = p.acc;
        w.row({h_text(p.cells), e4(a.rel_e_p()), e4(a.M_p / a.norm_p), e4(a.rel_e_u()), e4(a.M_u / a.norm_u),
               e4(a.rel_combined()), e4(a.M / (a.norm_p + a.norm_u)), ratio_cell(a.M, a.combined)});
    }
    return w.str();
}

std::string indicators_csv(const StepReport& r) {
    CsvWriter w({"cell", "error_p", "indicator_p", "error_u", "indicator_u"});
    for (std::size_t c = 0; c < r.indicator_p.size(); ++c)
        w.row({std::to_string(c), e4(r.errors.per_cell_p[c]), e4(r.indicator_p[c]), e4(r.errors.per_cell_u[c]),
               e4(r.indicator_u[c])});
    return w.str();
}

std::string manifest_text(const RunConfig& c, const std::vector<PointResult>& points) {
    std::ostringstream os;
    os << config_text(c);
    if (!points.empty()) {
        const TuningConstants& k = points.front().constants;
        os << "\n[constants]\n"
           << "L = " << num(k.L) << "\n"
           << "gamma = " << num(k.gamma) << "\n"
           << "q = " << num(k.q) << "\n"
           << "lambda_K = " << num(k.lambda_K) << "\n"
           << "C_F = " << num(k.C_F) << "\n"
           << "C_K = " << num(k.C_K) << "\n"
           << "C_tr = " << num(k.C_tr) << "\n"
           << "Cp2 = " << num(k.Cp2) << "\n"
           << "Cu2 = " << num(k.Cu2) << "\n"
           << "below_guarantee = " << (k.below_guarantee ? "true" : "false") << "\n";
    }
    return os.str();
}

void write_vtk(std::ostream& os, const Mesh& mesh, const StepReport& r) {
    os << "# vtk DataFile Version 3.0\nstep " << r.n << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.vertices.size() << " double\n";
    char buf[96];
    for (const Point& p : mesh.vertices) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g 0\n", p.x, p.y);
        os << buf;
    }
    const int n = mesh.n_cells();
    os << "CELLS " << n << " " << 4 * n << "\n";
    for (const auto& c : mesh.cells) os << "3 " << c[0] << " " << c[1] << " " << c[2] << "\n";
    os << "CELL_TYPES " << n << "\n";
    for (int k = 0; k < n; ++k) os << "5\n";
    os << "CELL_DATA " << n << "\n";
    auto field = [&](const char* name, const std::vector<double>& v) {
        os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (double x : v) {
            std::snprintf(buf, sizeof buf, "%.10e\n", x);
            os << buf;
        }
    };
    field("error_p", r.errors.per_cell_p);
    field("indicator_p", r.indicator_p);
    field("error_u", r.errors.per_cell_u);
    field("indicator_u", r.indicator_u);
}

double CsvTable::value(std::size_t row, const std::string& column) const {
    const auto it = std::find(header.begin(), header.end(), column);
    if (it == header.end()) throw std::out_of_range("no column '" + column + "'");
    return std::stod(rows.at(row).at(static_cast<std::size_t>(it - header.begin())));
}

CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream is(text);
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (first) {
            t.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != t.header.size()) throw std::runtime_error("csv row width mismatch");
            t.rows.push_back(std::move(cells));
        }
    }
    return t;
}

namespace {

void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream os(p, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << text;
    if (!os) throw std::runtime_error("write failed for " + p.string());
}

}  // namespace

std::vector<PointResult> run_experiment(const RunConfig& c, std::ostream& log) {
    validate(c);
    const std::filesystem::path root(c.out);
    std::filesystem::create_directories(root);
    std::vector<PointResult> points;
    for (int cells : c.cells) {
        const std::filesystem::path dir = c.cells.size() > 1 ? root / ("h" + std::to_string(cells)) : root;
        std::filesystem::create_directories(dir);
        auto sink = [&](const StepReport& r, const Mesh& mesh) {
            const bool last = r.n == c.n_steps;
            if (c.indicators == RunConfig::Indicators::all || (c.indicators == RunConfig::Indicators::final && last))
                write_file(dir / ("indicators_" + std::to_string(r.n) + ".csv"), indicators_csv(r));
            if (c.vtk && last) {
                std::ostringstream os;
                write_vtk(os, mesh, r);
                write_file(dir / ("step_" + std::to_string(r.n) + ".vtk"), os.str());
            }
        };
        PointResult p = run_point(c, cells, sink);
        char buf[200];
        std::snprintf(buf, sizeof buf, "h = 1/%d: I_eff(M) = %.3f, max contraction ratio %.4e (q = %.4e), %.1f s\n",
                      cells, efficiency(p.acc.M, p.acc.combined), p.acc.max_ratio, p.constants.q, p.seconds);
        log << buf;
        for (const std::string& w : p.warnings) log << "warning: " << w << "\n";
        points.push_back(std::move(p));
    }
    write_file(root / "results.csv", results_csv(points));
    write_file(root / "iterations.csv", iterations_csv(points));
    write_file(root / "table3.csv", table3_csv(points));
    write_file(root / "manifest.ini", manifest_text(c, points));
    return points;
}

}  // namespace biot
