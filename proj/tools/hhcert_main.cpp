// Command-line front end: simplex volumes, exact closed forms, circulant
// arithmetic, averaging-operator decay experiments, and convexity
// certification, with reproducible seeds and machine-readable output.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hhcert/closed_forms.hpp"
#include "hhcert/expr.hpp"
#include "hhcert/hh_certify.hpp"
#include "hhcert/korovkin.hpp"
#include "hhcert/selftest.hpp"
#include "hhcert/simplex.hpp"

namespace {

using nlohmann::json;

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitEvalError = 3;

std::string fmt(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        if (token.empty()) continue;
        std::size_t used = 0;
        out.push_back(std::stod(token, &used));
    }
    if (out.empty()) throw CLI::ValidationError("expected a comma-separated list of numbers");
    return out;
}

hhcert::Interval parse_domain(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size())
        throw CLI::ValidationError("--domain expects a:b");
    hhcert::Interval dom;
    dom.lo = std::stod(text.substr(0, colon));
    dom.hi = std::stod(text.substr(colon + 1));
    if (!(dom.lo < dom.hi)) throw CLI::ValidationError("--domain requires a < b");
    return dom;
}

hhcert::SimplexMode parse_mode(const std::string& text) {
    if (text == "solid") return hhcert::SimplexMode::Solid;
    if (text == "face") return hhcert::SimplexMode::Face;
    throw CLI::ValidationError("--mode must be 'solid' or 'face'");
}

// Builtin name or expression text.
hhcert::Function1D make_function(const std::string& g) {
    for (const char* name : {"square", "reciprocal", "exponential", "logarithm", "sqrtAbs"})
        if (g == name) return hhcert::builtin_function(g);
    return hhcert::function_from_expression(g);
}

class OutputTarget {
public:
    explicit OutputTarget(const std::string& path) {
        if (!path.empty()) {
            file_.open(path, std::ios::binary);
            if (!file_) throw CLI::ValidationError("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

private:
    std::ofstream file_;
};

// ---------------------------------------------------------------------------
// volume
// ---------------------------------------------------------------------------

struct VolumeOptions {
    std::string sides;
};

int run_volume(const VolumeOptions& opt) {
    std::vector<hhcert::Rational> sides;
    std::string token;
    std::istringstream in(opt.sides);
    while (std::getline(in, token, ','))
        if (!token.empty()) sides.push_back(hhcert::parse_rational(token));
    const hhcert::Rational vol =
        hhcert::simplex_volume(std::span<const hhcert::Rational>(sides.data(), sides.size()));
    std::cout << "volume = " << hhcert::to_string(vol) << " (" << fmt(hhcert::to_double(vol))
              << ")\n";
    return kExitPass;
}

// ---------------------------------------------------------------------------
// closed-forms / contraction
// ---------------------------------------------------------------------------

struct ClosedFormsOptions {
    int n = 2;
    std::string s = "1";
    std::string format = "text";
};

int run_closed_forms(const ClosedFormsOptions& opt) {
    const hhcert::Rational s = hhcert::parse_rational(opt.s);
    const hhcert::Rational i = hhcert::slab_volume(opt.n, s);
    const hhcert::Rational j = hhcert::slab_first_moment(opt.n, s);
    const hhcert::Rational k = hhcert::scaled_simplex_first_moment(opt.n, s);
    const hhcert::ContractionRecord rec = hhcert::contraction_factor(opt.n);
    if (opt.format == "json") {
        json out;
        out["config"] = {{"subcommand", "closed-forms"}, {"n", opt.n}, {"s", opt.s}};
        out["I"] = {{"exact", hhcert::to_string(i)}, {"decimal", hhcert::to_double(i)}};
        out["J"] = {{"exact", hhcert::to_string(j)}, {"decimal", hhcert::to_double(j)}};
        out["K"] = {{"exact", hhcert::to_string(k)}, {"decimal", hhcert::to_double(k)}};
        out["deviation_integral"] = {{"exact", hhcert::to_string(rec.deviation_integral)},
                                     {"decimal", hhcert::to_double(rec.deviation_integral)}};
        out["rho"] = {{"exact", hhcert::to_string(rec.rho)}, {"decimal", rec.decimal}};
        std::cout << out.dump(2) << "\n";
        return kExitPass;
    }
    const std::string suffix = std::to_string(opt.n) + "(" + opt.s + ")";
    std::vector<std::pair<std::string, hhcert::Rational>> rows = {
        {"I_" + suffix, i},
        {"J_" + suffix, j},
        {"K_" + suffix, k},
        {"scriptI_" + std::to_string(opt.n), rec.deviation_integral},
        {"rho_" + std::to_string(opt.n), rec.rho},
    };
    std::size_t width = 0;
    for (const auto& [label, value] : rows) width = std::max(width, label.size());
    for (const auto& [label, value] : rows)
        std::cout << label << std::string(width - label.size(), ' ') << " = "
                  << hhcert::to_string(value) << " (" << fmt(hhcert::to_double(value)) << ")\n";
    return kExitPass;
}

struct ContractionOptions {
    int n_max = 12;
};

int run_contraction(const ContractionOptions& opt) {
    if (opt.n_max < 1 || opt.n_max > 64)
        throw CLI::ValidationError("--n-max must be between 1 and 64");
    struct Row {
        std::string n, integral, rho, decimal, below;
    };
    std::vector<Row> rows{{"n", "scriptI_n", "rho_n", "decimal", "< 1"}};
    bool all_below = true;
    for (int n = 1; n <= opt.n_max; ++n) {
        const hhcert::ContractionRecord rec = hhcert::contraction_factor(n);
        const bool below = rec.rho < 1;
        all_below = all_below && below;
        rows.push_back({std::to_string(n), hhcert::to_string(rec.deviation_integral),
                        hhcert::to_string(rec.rho), fmt(rec.decimal), below ? "yes" : "NO"});
    }
    std::size_t w0 = 0, w1 = 0, w2 = 0, w3 = 0;
    for (const Row& r : rows) {
        w0 = std::max(w0, r.n.size());
        w1 = std::max(w1, r.integral.size());
        w2 = std::max(w2, r.rho.size());
        w3 = std::max(w3, r.decimal.size());
    }
    auto pad = [](const std::string& s, std::size_t w) {
        return s + std::string(w - s.size() + 2, ' ');
    };
    for (const Row& r : rows)
        std::cout << pad(r.n, w0) << pad(r.integral, w1) << pad(r.rho, w2) << pad(r.decimal, w3)
                  << r.below << "\n";
    return all_below ? kExitPass : kExitFail;
}

// ---------------------------------------------------------------------------
// matrix
// ---------------------------------------------------------------------------

struct MatrixOptions {
    std::string op;
    std::string a, b, x;
    double tol = hhcert::kStochasticTol;
};

int run_matrix(const MatrixOptions& opt) {
    const hhcert::CirculantGenerator a{parse_double_list(opt.a)};
    if (opt.op == "multiply") {
        if (opt.b.empty()) throw CLI::ValidationError("multiply requires --b");
        const hhcert::CirculantGenerator b{parse_double_list(opt.b)};
        const auto r = hhcert::circ_multiply(a, b);
        for (std::size_t i = 0; i < r.row.size(); ++i)
            std::cout << (i ? "," : "") << fmt(r.row[i]);
        std::cout << "\n";
        return kExitPass;
    }
    if (opt.op == "apply") {
        if (opt.x.empty()) throw CLI::ValidationError("apply requires --x");
        const std::vector<double> x = parse_double_list(opt.x);
        const auto y = hhcert::circ_apply(a, x);
        for (std::size_t i = 0; i < y.size(); ++i) std::cout << (i ? "," : "") << fmt(y[i]);
        std::cout << "\n";
        return kExitPass;
    }
    if (opt.op == "classify") {
        const auto cls = hhcert::classify_stochasticity(a, opt.tol);
        std::cout << hhcert::to_string(cls.cls) << " (row sum " << fmt(cls.row_sum) << ")\n";
        return kExitPass;
    }
    throw CLI::ValidationError("matrix operation must be multiply, apply or classify");
}

// ---------------------------------------------------------------------------
// korovkin
// ---------------------------------------------------------------------------

struct KorovkinOptions {
    int n = 2;
    int m_max = 10;
    long long samples = 100000;
    std::string mode = "face";
    std::uint64_t seed = hhcert::kDefaultSeed;
    std::string target = "g";
    int workers = 1;
    std::string format = "csv";
    std::string output;
};

hhcert::GeneratorTarget make_target(const std::string& name) {
    if (name == "g") return [](std::span<const double> t) { return hhcert::barycenter_l1(t); };
    if (name == "t1") return [](std::span<const double> t) { return t[0]; };
    if (name == "one") return [](std::span<const double>) { return 1.0; };
    throw CLI::ValidationError("--target must be g, t1 or one");
}

int run_korovkin(const KorovkinOptions& opt) {
    const hhcert::SimplexMode mode = parse_mode(opt.mode);
    if (mode == hhcert::SimplexMode::Solid)
        std::cerr << "note: solid-mode generators have row sum < 1 almost surely, so the\n"
                     "      averaged products drain toward the zero matrix and the distance\n"
                     "      target rises toward 1 instead of decaying; use face mode for the\n"
                     "      decay experiment.\n";
    const hhcert::DecaySeries series = hhcert::decay_experiment(
        make_target(opt.target), opt.n, opt.m_max, opt.samples, mode, opt.seed, opt.workers);

    OutputTarget out(opt.output);
    if (opt.format == "json") {
        json doc;
        doc["config"] = {{"subcommand", "korovkin"}, {"n", opt.n},       {"m_max", opt.m_max},
                         {"samples", opt.samples},   {"mode", opt.mode}, {"seed", opt.seed},
                         {"target", opt.target},     {"workers", opt.workers}};
        doc["bound"] = series.bound;
        doc["rho"] = series.contraction_rho;
        doc["fitted_ratio"] = series.fitted ? json(series.fitted_ratio) : json();
        json rows = json::array();
        for (const auto& e : series.estimates)
            rows.push_back({{"m", e.m},
                            {"mean", e.mean},
                            {"stderr", e.std_error},
                            {"bound", series.bound}});
        doc["rows"] = rows;
        out.stream() << doc.dump(2) << "\n";
        return kExitPass;
    }

    std::ostream& os = out.stream();
    os << "# hhcert korovkin\n";
    os << "# n=" << opt.n << " m-max=" << opt.m_max << " samples=" << opt.samples
       << " mode=" << opt.mode << " seed=" << opt.seed << " target=" << opt.target
       << " workers=" << opt.workers << "\n";
    os << "# bound=" << fmt(series.bound) << " rho=" << fmt(series.contraction_rho)
       << " fitted-ratio=" << (series.fitted ? fmt(series.fitted_ratio) : "n/a") << "\n";
    os << "m,mean,stderr,bound,mode,n,seed\n";
    for (const auto& e : series.estimates)
        os << e.m << "," << fmt(e.mean) << "," << fmt(e.std_error) << "," << fmt(series.bound)
           << "," << opt.mode << "," << opt.n << "," << opt.seed << "\n";
    return kExitPass;
}

// ---------------------------------------------------------------------------
// certify / certify-nd
// ---------------------------------------------------------------------------

struct CertifyOptions {
    std::string property;
    std::string g;
    std::string domain;
    double modulus = 0.0;
    int grid = 33;
    int quad_order = 32;
    double tol = 1e-9;
    std::string format = "csv";
    std::string output;
};

json report_to_json(const hhcert::CertificateReport& rep) {
    json doc;
    doc["property"] = hhcert::to_string(rep.property);
    doc["function"] = rep.function_name;
    doc["modulus"] = rep.modulus;
    doc["domain"] = rep.domain;
    doc["grid"] = rep.grid_spec;
    doc["tol"] = rep.tol;
    doc["verdict"] = rep.verdict == hhcert::Verdict::Pass ? "pass" : "fail";
    doc["min_margin"] = rep.min_margin;
    doc["quad_error_bound"] = rep.quad_error_bound;
    doc["finding"] = rep.finding;
    json margins = json::array();
    for (const auto& m : rep.margins)
        margins.push_back(
            {{"x1", m.x1}, {"x2", m.x2}, {"lhs", m.lhs}, {"rhs", m.rhs}, {"margin", m.margin}});
    for (const auto& m : rep.point_margins)
        margins.push_back({{"x", m.x}, {"lhs", m.lhs}, {"rhs", m.rhs}, {"margin", m.margin}});
    doc["margins"] = margins;
    if (rep.witness)
        doc["witness"] = {{"x1", rep.witness->x1},
                          {"x2", rep.witness->x2},
                          {"lhs", rep.witness->lhs},
                          {"rhs", rep.witness->rhs},
                          {"margin", rep.witness->margin}};
    if (rep.point_witness)
        doc["witness"] = {{"x", rep.point_witness->x},
                          {"lhs", rep.point_witness->lhs},
                          {"rhs", rep.point_witness->rhs},
                          {"margin", rep.point_witness->margin}};
    json excluded = json::array();
    for (const auto& e : rep.excluded)
        excluded.push_back({{"x1", e.x1}, {"x2", e.x2}, {"reason", e.reason}});
    doc["excluded"] = excluded;
    doc["warnings"] = rep.warnings;
    if (rep.conclusion) doc["conclusion"] = report_to_json(*rep.conclusion);
    return doc;
}

void write_certify_csv(std::ostream& os, const hhcert::CertificateReport& rep, const json& config) {
    os << "# hhcert certify\n";
    os << "#";
    for (const auto& [key, value] : config.items())
        os << " " << key << "=" << (value.is_string() ? value.get<std::string>() : value.dump());
    os << "\n";
    os << "# verdict=" << (rep.verdict == hhcert::Verdict::Pass ? "pass" : "fail")
       << " min-margin=" << fmt(rep.min_margin)
       << " quad-error-bound=" << fmt(rep.quad_error_bound) << " finding=" << (rep.finding ? 1 : 0);
    if (rep.conclusion)
        os << " conclusion="
           << (rep.conclusion->verdict == hhcert::Verdict::Pass ? "pass" : "fail")
           << " conclusion-min-margin=" << fmt(rep.conclusion->min_margin);
    os << "\n";
    if (rep.witness)
        os << "# witness x1=" << fmt(rep.witness->x1) << " x2=" << fmt(rep.witness->x2)
           << " margin=" << fmt(rep.witness->margin) << "\n";
    for (const auto& e : rep.excluded)
        os << "# excluded x1=" << fmt(e.x1) << " x2=" << fmt(e.x2) << " reason="
           << e.reason << "\n";
    for (const auto& w : rep.warnings) os << "# warning " << w << "\n";
    os << "x1,x2,lhs,rhs,margin\n";
    for (const auto& m : rep.margins)
        os << fmt(m.x1) << "," << fmt(m.x2) << "," << fmt(m.lhs) << "," << fmt(m.rhs) << ","
           << fmt(m.margin) << "\n";
}

int report_exit_code(const hhcert::CertificateReport& rep) {
    const bool pass = rep.verdict == hhcert::Verdict::Pass &&
                      (!rep.conclusion || rep.conclusion->verdict == hhcert::Verdict::Pass);
    return pass ? kExitPass : kExitFail;
}

int run_certify(const CertifyOptions& opt) {
    const hhcert::Function1D g = make_function(opt.g);
    const hhcert::Interval dom = parse_domain(opt.domain);
    hhcert::CertificateReport rep;
    if (opt.property == "convex")
        rep = hhcert::certify_convex(g, dom, opt.grid, opt.quad_order, opt.tol);
    else if (opt.property == "quasi")
        rep = hhcert::certify_quasiconvex(g, dom, opt.grid, opt.quad_order, opt.tol);
    else if (opt.property == "strong")
        rep = hhcert::certify_strong_convex(g, opt.modulus, dom, opt.grid, opt.quad_order, opt.tol);
    else
        throw CLI::ValidationError("certify property must be convex, quasi or strong");

    const json config = {{"subcommand", "certify"}, {"property", opt.property},
                         {"g", opt.g},              {"domain", opt.domain},
                         {"modulus", opt.modulus},  {"grid", opt.grid},
                         {"quad-order", opt.quad_order}, {"tol", opt.tol}};
    OutputTarget out(opt.output);
    if (opt.format == "json") {
        json doc = report_to_json(rep);
        doc["config"] = config;
        out.stream() << doc.dump(2) << "\n";
    } else {
        write_certify_csv(out.stream(), rep, config);
    }
    return report_exit_code(rep);
}

struct CertifyNdOptions {
    std::string f;
    int n = 2;
    std::string points_file;
    std::string mode = "solid";
    long long budget = 0;  // 0 => default by scheme
    double tol = 1e-9;
    std::uint64_t seed = hhcert::kDefaultSeed;
    std::string format = "csv";
    std::string output;
};

std::vector<std::vector<double>> read_points_file(const std::string& path, int n) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("cannot open points file: " + path);
    std::vector<std::vector<double>> points;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        for (char& c : line)
            if (c == ',' || c == '\t') c = ' ';
        std::istringstream ls(line);
        std::vector<double> point;
        double v = 0;
        while (ls >> v) point.push_back(v);
        if (point.empty()) continue;
        if (static_cast<int>(point.size()) != n)
            throw CLI::ValidationError("points file line has wrong dimension: " + line);
        points.push_back(std::move(point));
    }
    if (points.empty()) throw CLI::ValidationError("points file contains no points");
    return points;
}

int run_certify_nd(const CertifyNdOptions& opt) {
    if (opt.n < 1 || opt.n > 64) throw CLI::ValidationError("--n must be between 1 and 64");
    const hhcert::FunctionND f = hhcert::function_from_expression_nd(opt.f, opt.n);
    const auto points = read_points_file(opt.points_file, opt.n);
    const hhcert::SimplexMode mode = parse_mode(opt.mode);
    const long long budget = opt.budget > 0 ? opt.budget : (opt.n <= 3 ? 32 : 100000);
    const hhcert::CertificateReport rep =
        hhcert::certify_nd_premise(f, points, mode, budget, opt.tol, opt.seed);

    const json config = {{"subcommand", "certify-nd"}, {"f", opt.f},       {"n", opt.n},
                         {"points", opt.points_file},  {"mode", opt.mode}, {"budget", budget},
                         {"tol", opt.tol},             {"seed", opt.seed}};
    OutputTarget out(opt.output);
    if (opt.format == "json") {
        json doc = report_to_json(rep);
        doc["config"] = config;
        out.stream() << doc.dump(2) << "\n";
    } else {
        std::ostream& os = out.stream();
        os << "# hhcert certify-nd\n";
        os << "#";
        for (const auto& [key, value] : config.items())
            os << " " << key << "="
               << (value.is_string() ? value.get<std::string>() : value.dump());
        os << "\n";
        os << "# verdict=" << (rep.verdict == hhcert::Verdict::Pass ? "pass" : "fail")
           << " min-margin=" << fmt(rep.min_margin) << " finding=" << (rep.finding ? 1 : 0)
           << "\n";
        for (const auto& w : rep.warnings) os << "# warning " << w << "\n";
        os << "point,lhs,rhs,margin\n";
        for (const auto& m : rep.point_margins) {
            std::string coords;
            for (std::size_t i = 0; i < m.x.size(); ++i)
                coords += (i ? "," : "") + fmt(m.x[i]);
            os << csv_field(coords) << "," << fmt(m.lhs) << "," << fmt(m.rhs) << ","
               << fmt(m.margin) << "\n";
        }
    }
    return report_exit_code(rep);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simplex averaging, circulant algebra and Hermite-Hadamard style convexity "
                 "certification"};
    app.require_subcommand(1);

    VolumeOptions vol_opt;
    auto* vol = app.add_subcommand("volume", "Exact volume of a scaled simplex");
    vol->add_option("--sides", vol_opt.sides, "Comma-separated side lengths (rationals)")
        ->required();

    ClosedFormsOptions cf_opt;
    auto* cf = app.add_subcommand("closed-forms",
                                  "Exact slab/corner integrals and the contraction factor");
    cf->add_option("--n", cf_opt.n, "Dimension (1..64)")->required()->check(CLI::Range(1, 64));
    cf->add_option("--s", cf_opt.s, "Cut parameter as a rational (default 1)");
    cf->add_option("--format", cf_opt.format, "text|json")
        ->check(CLI::IsMember({"text", "json"}));

    ContractionOptions con_opt;
    auto* con = app.add_subcommand("contraction", "Table of contraction factors rho_n");
    con->add_option("--n-max", con_opt.n_max, "Largest dimension (default 12)")
        ->check(CLI::Range(1, 64));

    MatrixOptions mat_opt;
    auto* mat = app.add_subcommand("matrix", "Circulant generator arithmetic");
    mat->add_option("op", mat_opt.op, "multiply|apply|classify")->required();
    mat->add_option("--a", mat_opt.a, "First generator row")->required();
    mat->add_option("--b", mat_opt.b, "Second generator row (multiply)");
    mat->add_option("--x", mat_opt.x, "Vector to apply to (apply)");
    mat->add_option("--tol", mat_opt.tol, "Classification tolerance");

    KorovkinOptions kor_opt;
    auto* kor = app.add_subcommand("korovkin", "Decay experiment for the averaging operators");
    kor->add_option("--n", kor_opt.n, "Dimension")->required()->check(CLI::Range(1, 64));
    kor->add_option("--m-max", kor_opt.m_max, "Largest depth (default 10)")->check(CLI::Range(2, 64));
    kor->add_option("--samples", kor_opt.samples, "Samples per depth (default 100000)")
        ->check(CLI::PositiveNumber);
    kor->add_option("--mode", kor_opt.mode, "face (default) or solid")
        ->check(CLI::IsMember({"face", "solid"}));
    kor->add_option("--seed", kor_opt.seed, "Random seed (default 42)");
    kor->add_option("--target", kor_opt.target, "g (default), t1 or one");
    kor->add_option("--workers", kor_opt.workers, "Worker threads (default 1)")
        ->check(CLI::Range(1, 256));
    kor->add_option("--format", kor_opt.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    kor->add_option("--output", kor_opt.output, "Output path (default stdout)");

    CertifyOptions cert_opt;
    auto* cert = app.add_subcommand("certify", "Certify convexity properties of g on an interval");
    cert->add_option("property", cert_opt.property, "convex|quasi|strong")->required();
    cert->add_option("--g", cert_opt.g, "Expression in x, or a builtin name")->required();
    cert->add_option("--domain", cert_opt.domain, "Interval a:b")->required();
    cert->add_option("--modulus", cert_opt.modulus, "Strong convexity modulus c >= 0");
    cert->add_option("--grid", cert_opt.grid, "Grid points per axis (default 33)")
        ->check(CLI::Range(2, 1024));
    cert->add_option("--quad-order", cert_opt.quad_order, "Quadrature order (default 32)")
        ->check(CLI::Range(4, 128));
    cert->add_option("--tol", cert_opt.tol, "Margin tolerance (default 1e-9)");
    cert->add_option("--format", cert_opt.format, "csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    cert->add_option("--output", cert_opt.output, "Output path (default stdout)");

    CertifyNdOptions nd_opt;
    auto* nd = app.add_subcommand("certify-nd",
                                  "Certify the n-dimensional averaging premise at points");
    nd->add_option("--f", nd_opt.f, "Expression in x1..xN (symmetric)")->required();
    nd->add_option("--n", nd_opt.n, "Dimension")->required()->check(CLI::Range(1, 64));
    nd->add_option("--points", nd_opt.points_file, "File of points, one per line")->required();
    nd->add_option("--mode", nd_opt.mode, "solid (default) or face")
        ->check(CLI::IsMember({"solid", "face"}));
    nd->add_option("--budget", nd_opt.budget, "Quadrature order (n <= 3) or sample count");
    nd->add_option("--tol", nd_opt.tol, "Margin tolerance (default 1e-9)");
    nd->add_option("--seed", nd_opt.seed, "Random seed (default 42)");
    nd->add_option("--format", nd_opt.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    nd->add_option("--output", nd_opt.output, "Output path (default stdout)");

    auto* self = app.add_subcommand("selftest", "Run the acceptance suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }

    try {
        if (vol->parsed()) return run_volume(vol_opt);
        if (cf->parsed()) return run_closed_forms(cf_opt);
        if (con->parsed()) return run_contraction(con_opt);
        if (mat->parsed()) return run_matrix(mat_opt);
        if (kor->parsed()) return run_korovkin(kor_opt);
        if (cert->parsed()) return run_certify(cert_opt);
        if (nd->parsed()) return run_certify_nd(nd_opt);
        if (self->parsed())
            return hhcert::selftest::run_and_print(argv[0], std::cout) == 0 ? kExitPass
                                                                            : kExitFail;
    } catch (const hhcert::EvaluationError& e) {
        std::cerr << "evaluation error: " << e.what() << "\n";
        return kExitEvalError;
    } catch (const hhcert::expr::EvalError& e) {
        std::cerr << "evaluation error: " << e.what() << "\n";
        return kExitEvalError;
    } catch (const hhcert::expr::ParseError& e) {
        std::cerr << "expression error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
