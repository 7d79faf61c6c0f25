#pragma once

#include <cstddef>
#include <string>
#include <vector>

// Self-contained statistics kernels. Everything here is deterministic and
// locale-independent; undefined results come back as NaN (callers treat NaN
// as "missing"). Tail probabilities go through hand-rolled regularized
// incomplete beta/gamma so results don't depend on platform libm extensions.
namespace vizbox::stats {

inline constexpr double kNaN = __builtin_nan("");

bool is_nan(double v);

// --- order statistics ------------------------------------------------------

// Linear-interpolation quantile on a sorted sample (the "type 7" estimator:
// h = (n-1)p, interpolate between floor(h) and floor(h)+1). p in [0,1].
double quantile_sorted(const std::vector<double>& sorted, double p);

// --- dispersion / shape ----------------------------------------------------

double mean(const std::vector<double>& v);
double variance_sample(const std::vector<double>& v);  // ddof=1, NaN if n<2
double stddev_sample(const std::vector<double>& v);

// central population moment of order k (ddof=0)
double central_moment(const std::vector<double>& v, int k);
// m_k / m_2^(k/2); NaN if n<2 or m_2 == 0
double standardized_moment(const std::vector<double>& v, int k);
double skewness(const std::vector<double>& v);        // g1 = m3 / m2^1.5
double kurtosis_excess(const std::vector<double>& v); // m4 / m2^2 - 3

// --- categorical spread ----------------------------------------------------

struct EntropyGini {
    double entropy;  // natural log
    double gini;     // 1 - sum p_i^2
};
EntropyGini shannon_entropy_and_gini(const std::vector<std::size_t>& counts);

// --- normality (skewness + kurtosis omnibus) -------------------------------

struct NormalityResult {
    double z_skew;
    double z_kurt;
    double statistic;  // z_skew^2 + z_kurt^2
    double p_value;    // exp(-statistic/2), chi^2 with 2 df
    bool valid;        // n >= 8 and nonzero variance
};
NormalityResult normality_test(const std::vector<double>& v);

// --- rank correlation ------------------------------------------------------

// Kendall tau-b with tie correction; NaN when either side is all ties.
double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y);

// --- string distance -------------------------------------------------------

std::size_t levenshtein(const std::string& a, const std::string& b);

// --- paired-sample tests ---------------------------------------------------

struct PearsonResult {
    double r;
    double p_value;  // two-sided via Student t with n-2 df
    bool valid;      // n >= 3 and both sides non-constant
};
PearsonResult pearson(const std::vector<double>& x, const std::vector<double>& y);

struct LinregressResult {
    double slope;
    double intercept;
    double stderr_slope;  // sqrt(RSS/(n-2)/Sxx)
    double p_value;       // two-sided slope t-test
    double rmse;          // sqrt(RSS/n)
    bool valid;           // n >= 3 and x non-constant
};
LinregressResult linregress(const std::vector<double>& x, const std::vector<double>& y);

// --- unpaired-sample tests -------------------------------------------------

struct Ks2Result {
    double statistic;  // sup |F1 - F2|
    double p_value;    // classical asymptotic series at lambda = D*sqrt(n1*n2/(n1+n2))
    bool valid;        // both sides n >= 2
};
Ks2Result ks_two_sample(std::vector<double> a, std::vector<double> b);

struct AnovaResult {
    double f_statistic;  // F(1, N-2) for two groups
    double p_value;
    bool valid;  // both groups n >= 2 and within-group variance > 0
};
AnovaResult anova_two_groups(const std::vector<double>& a, const std::vector<double>& b);

struct Chi2Result {
    double statistic;
    double p_value;
    std::size_t dof;
    bool valid;  // at least 2x2 after dropping empty rows/cols
};
// observed[r][c] counts; no continuity correction
Chi2Result chi2_contingency(const std::vector<std::vector<std::size_t>>& observed);

// --- clustering ------------------------------------------------------------

// Deterministic k-means on 2-d points: first center is point 0, the rest via
// farthest-point (max-min distance, lowest index on ties), then Lloyd until
// max centroid shift < 1e-6 or 100 iterations. Empty clusters keep their
// previous center. Returns mean distance of points to assigned centers;
// NaN when n < k.
double kmeans_avg_err(const std::vector<std::pair<double, double>>& points, std::size_t k);

// --- tail probabilities ----------------------------------------------------

// regularized incomplete beta I_x(a, b)
double reg_inc_beta(double a, double b, double x);
// regularized upper incomplete gamma Q(a, x)
double reg_gamma_q(double a, double x);

double student_t_sf_two_sided(double t, double df);
double f_sf(double f, double df1, double df2);
double chi2_sf(double x, double df);

}  // namespace vizbox::stats
