#pragma once

#include <string>
#include <utility>
#include <vector>

namespace qhgeo {

// Iterated-exponential number: value = mantissa at level 0, else
// exp(exp(...(mantissa))) with `level` exponentiations. Canonical form keeps
// level-0 mantissas below 1e15 and deeper mantissas in [log 1e15, 1e15), so
// comparing level first and mantissa second orders values exactly.
struct ExtLog {
    int level = 0;
    double mantissa = 0.0;
};

ExtLog ext_from_value(double v);
// Collapses to a plain double; +inf once past double range.
double ext_as_value(ExtLog x);
// -1, 0, +1.
int ext_cmp(const ExtLog& a, const ExtLog& b);
// Natural log; exact level shift above level 0.
ExtLog ext_log(const ExtLog& x);
ExtLog ext_exp(const ExtLog& x);
// Sum of two values. Terms more than a factor e^40 below the larger one are
// dropped; they sit beyond the mantissa's precision anyway.
ExtLog ext_add(ExtLog a, ExtLog b);
// x * k for plain k > 0; at level >= 2 the factor is below representable
// precision and x is returned unchanged.
ExtLog ext_scale(const ExtLog& x, double k);
ExtLog ext_mul(const ExtLog& a, const ExtLog& b);
ExtLog ext_pow(const ExtLog& x, double k);
ExtLog ext_pow_ext(const ExtLog& x, const ExtLog& k);

// Distortion function eta restricted to families with closed-form inverses:
// power law a*t^b (a, b >= 1) or affine a*t + c (a > 0, c >= 0, a + c >= 1).
struct EtaDescriptor {
    enum class Kind { power, affine };
    Kind kind = Kind::power;
    double a = 1.0;
    double b = 1.0;  // exponent for power, additive offset c for affine

    // "pow:a:b" or "affine:a[:c]".
    static EtaDescriptor parse(const std::string& text);
    std::string to_string() const;
};

// Logs of the constant cascade C1 -> M2 -> M1 -> M0 -> B0 -> A0 and of the
// two headline coefficients, evaluated bottom-up entirely in extended log
// space. log_cigar_coeff is log(8 A0 B0), the length-cigar coefficient;
// log_inner_unif_coeff is log(32 A0 B0^2), the inner-uniformity coefficient.
struct ConstantLedger {
    double M = 0.0;
    double C = 0.0;
    EtaDescriptor eta;
    ExtLog logC1;
    ExtLog logM2;
    ExtLog logM1;
    ExtLog logM0;
    ExtLog logB0;
    ExtLog logA0;
    ExtLog log_cigar_coeff;
    ExtLog log_inner_unif_coeff;

    std::string to_json_text() const;
};

// Requires 37 <= M + 1 <= C and a descriptor with eta(1) >= 1.
ConstantLedger compute_ledger(double M, double C, const EtaDescriptor& eta);

struct MonotonicityReport {
    std::vector<ConstantLedger> rows;
    // Every ledger entry nondecreasing along the componentwise (M, C) order.
    bool monotone = false;

    std::string to_csv() const;
};

MonotonicityReport ledger_monotonicity_report(const std::vector<std::pair<double, double>>& grid,
                                              const EtaDescriptor& eta);

}  // namespace qhgeo
