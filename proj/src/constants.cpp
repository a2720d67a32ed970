#include "qhgeo/constants.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <locale>
#include <sstream>

#include "qhgeo/errors.hpp"

namespace qhgeo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kT = 1e15;
const double kLogT = std::log(kT);

ExtLog normalized(int level, double m) {
    if (!std::isfinite(m))
        throw Error(ErrorCode::PreconditionViolation, "mantissa left the representable range");
    while (level > 0 && m < kLogT) {
        m = std::exp(m);
        --level;
    }
    while (m >= kT) {
        m = std::log(m);
        ++level;
    }
    return {level, m};
}

}  // namespace

ExtLog ext_from_value(double v) {
    if (!std::isfinite(v))
        throw Error(ErrorCode::PreconditionViolation, "value must be finite");
    return normalized(0, v);
}

double ext_as_value(ExtLog x) {
    while (x.level > 0 && x.mantissa <= 709.0) {
        x.mantissa = std::exp(x.mantissa);
        --x.level;
    }
    return x.level == 0 ? x.mantissa : kInf;
}

int ext_cmp(const ExtLog& a, const ExtLog& b) {
    if (a.level != b.level) return a.level < b.level ? -1 : 1;
    if (a.mantissa != b.mantissa) return a.mantissa < b.mantissa ? -1 : 1;
    return 0;
}

ExtLog ext_log(const ExtLog& x) {
    if (x.level > 0) return {x.level - 1, x.mantissa};
    if (!(x.mantissa > 0.0))
        throw Error(ErrorCode::PreconditionViolation, "log of a nonpositive value");
    return normalized(0, std::log(x.mantissa));
}

ExtLog ext_exp(const ExtLog& x) {
    if (x.level == 0) return normalized(x.mantissa < kLogT ? 0 : 1,
                                        x.mantissa < kLogT ? std::exp(x.mantissa) : x.mantissa);
    return {x.level + 1, x.mantissa};
}

ExtLog ext_add(ExtLog a, ExtLog b) {
    if (ext_cmp(a, b) < 0) std::swap(a, b);
    const double da = ext_as_value(a);
    if (std::isfinite(da)) {
        const double s = da + ext_as_value(b);
        if (std::isfinite(s)) return ext_from_value(s);
    }
    // a is huge; fold b in as a log-space correction, or drop it.
    if (b.level == 0 && !(b.mantissa > 0.0)) return a;
    const double la = ext_as_value(ext_log(a));
    const double lb = ext_as_value(ext_log(b));
    if (!std::isfinite(la) || !std::isfinite(lb)) return a;
    const double d = la - lb;
    if (d > 40.0) return a;
    return ext_exp(ext_from_value(la + std::log1p(std::exp(-d))));
}

ExtLog ext_scale(const ExtLog& x, double k) {
    if (!(k > 0.0) || !std::isfinite(k))
        throw Error(ErrorCode::PreconditionViolation, "scale factor must be positive");
    if (x.level == 0) {
        const double p = x.mantissa * k;
        if (std::isfinite(p)) return normalized(0, p);
        if (!(x.mantissa > 0.0))
            throw Error(ErrorCode::PreconditionViolation, "scale overflow on a nonpositive value");
        return normalized(1, std::log(x.mantissa) + std::log(k));
    }
    if (x.level == 1) return normalized(1, x.mantissa + std::log(k));
    return x;  // adjustment below mantissa precision at level >= 2
}

ExtLog ext_mul(const ExtLog& a, const ExtLog& b) {
    return ext_exp(ext_add(ext_log(a), ext_log(b)));
}

ExtLog ext_pow(const ExtLog& x, double k) {
    return ext_exp(ext_scale(ext_log(x), k));
}

ExtLog ext_pow_ext(const ExtLog& x, const ExtLog& k) {
    return ext_exp(ext_mul(k, ext_log(x)));
}

EtaDescriptor EtaDescriptor::parse(const std::string& text) {
    std::istringstream in(text);
    std::string head;
    std::getline(in, head, ':');
    EtaDescriptor d;
    if (head == "pow")
        d.kind = Kind::power;
    else if (head == "affine")
        d.kind = Kind::affine;
    else
        throw Error(ErrorCode::MalformedSpec, "eta descriptor must start with pow: or affine:");

    std::string field;
    if (!std::getline(in, field, ':'))
        throw Error(ErrorCode::MalformedSpec, "eta descriptor is missing its first parameter");
    std::size_t used = 0;
    try {
        d.a = std::stod(field, &used);
    } catch (const std::exception&) {
        throw Error(ErrorCode::MalformedSpec, "eta parameter is not a number");
    }
    if (used != field.size())
        throw Error(ErrorCode::MalformedSpec, "eta parameter is not a number");

    if (std::getline(in, field, ':')) {
        try {
            d.b = std::stod(field, &used);
        } catch (const std::exception&) {
            throw Error(ErrorCode::MalformedSpec, "eta parameter is not a number");
        }
        if (used != field.size())
            throw Error(ErrorCode::MalformedSpec, "eta parameter is not a number");
    } else {
        d.b = d.kind == Kind::power ? 1.0 : 0.0;
    }
    if (std::getline(in, field, ':'))
        throw Error(ErrorCode::MalformedSpec, "eta descriptor has trailing fields");
    return d;
}

std::string EtaDescriptor::to_string() const {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out.precision(17);
    out << (kind == Kind::power ? "pow" : "affine") << ':' << a << ':' << b;
    return out.str();
}

namespace {

ExtLog ext_max(const ExtLog& a, const ExtLog& b) { return ext_cmp(a, b) < 0 ? b : a; }

void check_eta(const EtaDescriptor& eta) {
    if (!std::isfinite(eta.a) || !std::isfinite(eta.b))
        throw Error(ErrorCode::InputConstraintViolation, "eta parameters must be finite");
    if (eta.kind == EtaDescriptor::Kind::power) {
        if (eta.a < 1.0 || eta.b < 1.0)
            throw Error(ErrorCode::InputConstraintViolation,
                        "power eta needs a >= 1 and exponent >= 1");
    } else {
        if (!(eta.a > 0.0) || eta.b < 0.0 || eta.a + eta.b < 1.0)
            throw Error(ErrorCode::InputConstraintViolation,
                        "affine eta needs a > 0, c >= 0, a + c >= 1");
    }
}

// log eta(t) from Lt = log t, for t >= 1.
ExtLog log_eta(const EtaDescriptor& eta, const ExtLog& Lt) {
    if (eta.kind == EtaDescriptor::Kind::power)
        return ext_add(ext_from_value(std::log(eta.a)), ext_scale(Lt, eta.b));
    const double t = ext_as_value(ext_exp(Lt));
    if (std::isfinite(t)) {
        const double v = eta.a * t + eta.b;
        if (std::isfinite(v)) return ext_from_value(std::log(v));
        const double la = std::log(eta.a) + std::log(t);
        const double lc = eta.b > 0.0 ? std::log(eta.b) : -kInf;
        const double hi = std::max(la, lc), lo = std::min(la, lc);
        return ext_from_value(hi + std::log1p(std::exp(lo - hi)));
    }
    // t is astronomically large; the offset sits below precision
    return ext_add(ext_from_value(std::log(eta.a)), Lt);
}

// eta^{-1}(s) for a small plain-double argument.
double eta_inverse_small(const EtaDescriptor& eta, double s) {
    double r;
    if (eta.kind == EtaDescriptor::Kind::power)
        r = std::pow(s / eta.a, 1.0 / eta.b);
    else
        r = (s - eta.b) / eta.a;
    if (!(r > 0.0) || !std::isfinite(r))
        throw Error(ErrorCode::EtaInversionFailure,
                    "eta cannot reach " + std::to_string(s) + " from a positive argument");
    return r;
}

// log of (eta^{-1}(1/v))^{-1} given Lv = log v, for astronomically large v.
// Closed form per family keeps the tiny intermediate out of the arithmetic.
ExtLog log_inv_eta_reciprocal(const EtaDescriptor& eta, const ExtLog& Lv) {
    if (eta.kind == EtaDescriptor::Kind::power)
        return ext_scale(ext_add(Lv, ext_from_value(std::log(eta.a))), 1.0 / eta.b);
    if (eta.b > 0.0)
        throw Error(ErrorCode::EtaInversionFailure,
                    "affine eta with a positive offset cannot reach the reciprocal range");
    return ext_add(Lv, ext_from_value(std::log(eta.a)));
}

void check_entry(const ExtLog& v, const char* name) {
    if (!std::isfinite(v.mantissa) || ext_cmp(v, ext_from_value(0.0)) <= 0)
        throw Error(ErrorCode::PreconditionViolation,
                    std::string(name) + " did not come out finite and positive");
}

nlohmann::ordered_json ext_json(const ExtLog& v) {
    return {{"level", v.level}, {"mantissa", v.mantissa}};
}

}  // namespace

ConstantLedger compute_ledger(double M, double C, const EtaDescriptor& eta) {
    if (!std::isfinite(M) || !std::isfinite(C) || 37.0 > M + 1.0 || M + 1.0 > C)
        throw Error(ErrorCode::InputConstraintViolation, "inputs must satisfy 37 <= M + 1 <= C");
    check_eta(eta);

    ConstantLedger led;
    led.M = M;
    led.C = C;
    led.eta = eta;

    led.logC1 = ext_from_value(4.0 * (C * M) * (C * M));

    // M2 = 10 C1^4 eta(C1) max{1, 1/eta^{-1}(C^-3/5)}
    const double small = std::pow(C, -3.0) / 5.0;
    const double corr = std::max(1.0, 1.0 / eta_inverse_small(eta, small));
    led.logM2 = ext_add(ext_add(ext_add(ext_from_value(std::log(10.0)), ext_scale(led.logC1, 4.0)),
                                log_eta(eta, led.logC1)),
                        ext_from_value(std::log(corr)));

    // M1 = max{ eta(M2^5), e^{M M2^5}, (eta^{-1}(M2^{-1}))^{-1} M2 }
    const ExtLog logM2p5 = ext_scale(led.logM2, 5.0);
    led.logM1 = ext_max(ext_max(log_eta(eta, logM2p5), ext_scale(ext_exp(logM2p5), M)),
                        ext_add(log_inv_eta_reciprocal(eta, led.logM2), led.logM2));

    // M0 = max{ e^{C1 M1}, eta(C1 M1^2) }
    led.logM0 = ext_max(ext_mul(ext_exp(led.logC1), ext_exp(led.logM1)),
                        log_eta(eta, ext_add(led.logC1, ext_scale(led.logM1, 2.0))));

    led.logB0 = ext_add(ext_from_value(std::log(20.0)), ext_scale(led.logM0, 2.0));

    // A0 = max{ e^{B0^2 M0}, (M1 eta(B0^2))^{M0} }
    const ExtLog m0v = ext_exp(led.logM0);
    led.logA0 =
        ext_max(ext_mul(ext_pow(ext_exp(led.logB0), 2.0), m0v),
                ext_mul(m0v, ext_add(led.logM1, log_eta(eta, ext_scale(led.logB0, 2.0)))));

    led.log_cigar_coeff = ext_add(ext_add(ext_from_value(std::log(8.0)), led.logA0), led.logB0);
    led.log_inner_unif_coeff =
        ext_add(ext_add(ext_from_value(std::log(32.0)), led.logA0), ext_scale(led.logB0, 2.0));

    check_entry(led.logC1, "logC1");
    check_entry(led.logM2, "logM2");
    check_entry(led.logM1, "logM1");
    check_entry(led.logM0, "logM0");
    check_entry(led.logB0, "logB0");
    check_entry(led.logA0, "logA0");
    check_entry(led.log_cigar_coeff, "log_cigar_coeff");
    check_entry(led.log_inner_unif_coeff, "log_inner_unif_coeff");
    return led;
}

std::string ConstantLedger::to_json_text() const {
    nlohmann::ordered_json j;
    j["schema"] = "qhgeo-constants/1";
    j["inputs"] = {{"M", M}, {"C", C}, {"eta", eta.to_string()}};
    nlohmann::ordered_json vals;
    vals["logC1"] = ext_json(logC1);
    vals["logM2"] = ext_json(logM2);
    vals["logM1"] = ext_json(logM1);
    vals["logM0"] = ext_json(logM0);
    vals["logB0"] = ext_json(logB0);
    vals["logA0"] = ext_json(logA0);
    vals["log_cigar_coeff"] = ext_json(log_cigar_coeff);
    vals["log_inner_unif_coeff"] = ext_json(log_inner_unif_coeff);
    j["values"] = vals;
    return j.dump(2);
}

namespace {

std::array<const ExtLog*, 8> ledger_entries(const ConstantLedger& l) {
    return {&l.logC1, &l.logM2, &l.logM1, &l.logM0,
            &l.logB0, &l.logA0, &l.log_cigar_coeff, &l.log_inner_unif_coeff};
}

constexpr const char* kEntryNames[] = {"logC1", "logM2", "logM1", "logM0",
                                       "logB0", "logA0", "log_cigar_coeff",
                                       "log_inner_unif_coeff"};

}  // namespace

MonotonicityReport ledger_monotonicity_report(const std::vector<std::pair<double, double>>& grid,
                                              const EtaDescriptor& eta) {
    MonotonicityReport rep;
    rep.rows.reserve(grid.size());
    for (const auto& [m, c] : grid) rep.rows.push_back(compute_ledger(m, c, eta));

    rep.monotone = true;
    for (const ConstantLedger& lo : rep.rows)
        for (const ConstantLedger& hi : rep.rows) {
            if (!(lo.M <= hi.M && lo.C <= hi.C)) continue;
            const auto le = ledger_entries(lo);
            const auto he = ledger_entries(hi);
            for (std::size_t f = 0; f < le.size(); ++f)
                if (ext_cmp(*le[f], *he[f]) > 0) rep.monotone = false;
        }
    return rep;
}

std::string MonotonicityReport::to_csv() const {
    std::ostringstream out;
    out.imbue(std::locale::classic());
    out.precision(17);
    out << "M,C";
    for (const char* n : kEntryNames) out << ',' << n << "_level," << n << "_mantissa";
    out << '\n';
    for (const ConstantLedger& row : rows) {
        out << row.M << ',' << row.C;
        for (const ExtLog* v : ledger_entries(row)) out << ',' << v->level << ',' << v->mantissa;
        out << '\n';
    }
    return out.str();
}

}  // namespace qhgeo
