// Copyright 2026 dextra Contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DEXTRA_FIT_HPP
#define DEXTRA_FIT_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dextra/rng.hpp"

namespace dextra {

enum class Ansatz { single_exp, double_exp, richardson };

enum class ParityFilter { odd, even, all };

inline const char* ansatz_name(Ansatz a) {
    switch (a) {
        case Ansatz::single_exp: return "single_exp";
        case Ansatz::double_exp: return "double_exp";
        case Ansatz::richardson: return "richardson";
    }
    return "?";
}

struct SeriesPoint {
    int d;
    double ev;
    double std_err;
    uint64_t n_shots;
};

/// Expectation values against code distance. Points at d <= cutoff_d are
/// fit points; anything larger serves as held-out reference.
struct DataSeries {
    std::vector<SeriesPoint> points;
    ParityFilter parity = ParityFilter::all;
    int cutoff_d = 0;

    std::vector<SeriesPoint> fit_points() const {
        std::vector<SeriesPoint> out;
        for (const auto& p : points) {
            if (p.d > cutoff_d)
                continue;
            if (parity == ParityFilter::odd && p.d % 2 == 0)
                continue;
            if (parity == ParityFilter::even && p.d % 2 == 1)
                continue;
            out.push_back(p);
        }
        return out;
    }

    void validate() const {
        for (size_t i = 1; i < points.size(); i++)
            if (points[i].d <= points[i - 1].d)
                throw std::invalid_argument("DataSeries: distances must be strictly increasing");
    }
};

/// y(d) = A + sum_i B_i exp(-C_i d). A is the extrapolated (mitigated)
/// expectation value; Richardson results reuse this container with the
/// extrapolated field only.
struct FitResult {
    Ansatz ansatz = Ansatz::single_exp;
    double A = 0.0;
    std::vector<double> B;
    std::vector<double> C;
    Eigen::MatrixXd covariance;
    double r2 = 0.0;
    double extrapolated = 0.0;
    bool converged = false;
    bool degenerate = false;           // data indistinguishable from a constant
    bool collapsed_to_single = false;  // double_exp degenerated, refit as single
    std::vector<double> bootstrap_samples;

    double evaluate(double d) const {
        double y = A;
        for (size_t i = 0; i < B.size(); i++)
            y += B[i] * std::exp(-C[i] * d);
        return y;
    }
};

namespace detail {

struct ExpModel {
    int n_terms;  // 1 or 2

    int n_params() const {
        return 1 + 2 * n_terms;
    }

    // Internal parameterization: (A, B_i, c_i = ln C_i). The log keeps
    // every C positive.
    double evaluate(const Eigen::VectorXd& theta, double d) const {
        double y = theta[0];
        for (int t = 0; t < n_terms; t++)
            y += theta[1 + 2 * t] * std::exp(-std::exp(theta[2 + 2 * t]) * d);
        return y;
    }

    void jacobian_row(const Eigen::VectorXd& theta, double d, Eigen::VectorXd& row) const {
        row[0] = 1.0;
        for (int t = 0; t < n_terms; t++) {
            double c = std::exp(theta[2 + 2 * t]);
            double e = std::exp(-c * d);
            row[1 + 2 * t] = e;
            row[2 + 2 * t] = -theta[1 + 2 * t] * c * d * e;
        }
    }
};

inline double weight_of(const SeriesPoint& p) {
    if (p.std_err > 0.0)
        return 1.0 / (p.std_err * p.std_err);
    // Zero recorded failures: rule-of-three upper bound 3/n as the error.
    if (p.n_shots > 0) {
        double s = 3.0 / static_cast<double>(p.n_shots);
        return 1.0 / (s * s);
    }
    return 1.0;
}

inline Eigen::VectorXd initial_guess(const std::vector<SeriesPoint>& pts, int n_terms) {
    Eigen::VectorXd theta(1 + 2 * n_terms);
    double a0 = pts.back().ev;
    double b_total = pts.front().ev - a0;
    double c0 = 0.5;
    double r1 = std::abs(pts[0].ev - a0), r2 = std::abs(pts[1].ev - a0);
    if (r1 > 0.0 && r2 > 0.0 && pts[1].d != pts[0].d) {
        double slope = -(std::log(r2) - std::log(r1)) / static_cast<double>(pts[1].d - pts[0].d);
        if (std::isfinite(slope) && slope > 1e-6)
            c0 = slope;
    }
    theta[0] = a0;
    for (int t = 0; t < n_terms; t++) {
        theta[1 + 2 * t] = b_total / n_terms;
        theta[2 + 2 * t] = std::log(c0 * (t + 1));
    }
    return theta;
}

// Extra double-exponential starting points; five parameters on few points
// leave shallow local minima that a single start can fall into.
inline std::vector<Eigen::VectorXd> double_exp_starts(
    const std::vector<SeriesPoint>& pts, const Eigen::VectorXd& base) {
    std::vector<Eigen::VectorXd> starts{base};
    Eigen::VectorXd wide = base;
    double b_total = base[1] + base[3];
    wide[1] = 0.8 * b_total;
    wide[3] = 0.2 * b_total;
    wide[4] = base[2] + std::log(4.0);
    starts.push_back(wide);
    Eigen::VectorXd slow = base;
    slow[2] = base[2] - std::log(2.0);
    slow[4] = base[2] + std::log(2.0);
    starts.push_back(slow);
    (void)pts;
    return starts;
}

}  // namespace detail

/// Weighted Levenberg-Marquardt fit of the exponential ansatz, with A
/// projected into [-1, 1] and decay rates kept positive through a log
/// parameterization.
inline FitResult lm_fit(const DataSeries& series, Ansatz ansatz) {
    if (ansatz == Ansatz::richardson)
        throw std::invalid_argument("lm_fit: richardson has a closed form, use richardson_extrapolate");
    series.validate();
    std::vector<SeriesPoint> pts = series.fit_points();
    detail::ExpModel model{ansatz == Ansatz::single_exp ? 1 : 2};
    const int n_params = model.n_params();
    const int n_pts = static_cast<int>(pts.size());
    if (n_pts < n_params)
        throw std::invalid_argument(
            "lm_fit: " + std::string(ansatz_name(ansatz)) + " needs at least " + std::to_string(n_params) +
            " fit points, got " + std::to_string(n_pts));

    FitResult result;
    result.ansatz = ansatz;

    std::vector<double> w(n_pts);
    double span = 0.0;
    for (int i = 0; i < n_pts; i++) {
        w[i] = std::sqrt(detail::weight_of(pts[i]));
        span = std::max(span, std::abs(pts[i].ev - pts[n_pts - 1].ev));
    }
    if (span < 1e-14) {
        // Constant data carries no decay information.
        result.degenerate = true;
        result.converged = true;
        result.A = std::clamp(pts[0].ev, -1.0, 1.0);
        result.extrapolated = result.A;
        result.B.assign(model.n_terms, 0.0);
        result.C.assign(model.n_terms, 1.0);
        result.covariance = Eigen::MatrixXd::Zero(n_params, n_params);
        result.r2 = 1.0;
        return result;
    }

    auto cost = [&](const Eigen::VectorXd& theta) {
        double s = 0.0;
        for (int i = 0; i < n_pts; i++) {
            double r = w[i] * (model.evaluate(theta, pts[i].d) - pts[i].ev);
            s += r * r;
        }
        return s;
    };

    Eigen::MatrixXd jac(n_pts, n_params);
    Eigen::VectorXd residual(n_pts), row(n_params);
    auto minimize_from = [&](Eigen::VectorXd theta0, double& out_cost, bool& out_converged) {
        theta0[0] = std::clamp(theta0[0], -1.0, 1.0);
        double current = cost(theta0);
        double lambda = 1e-3;
        bool converged = false;
        for (int iter = 0; iter < 500 && !converged; iter++) {
            for (int i = 0; i < n_pts; i++) {
                model.jacobian_row(theta0, pts[i].d, row);
                jac.row(i) = w[i] * row.transpose();
                residual[i] = w[i] * (model.evaluate(theta0, pts[i].d) - pts[i].ev);
            }
            Eigen::MatrixXd jtj = jac.transpose() * jac;
            Eigen::VectorXd jtr = jac.transpose() * residual;

            bool stepped = false;
            for (int attempt = 0; attempt < 40; attempt++) {
                Eigen::MatrixXd damped = jtj;
                for (int q = 0; q < n_params; q++)
                    damped(q, q) += lambda * std::max(jtj(q, q), 1e-12);
                Eigen::VectorXd delta = damped.ldlt().solve(-jtr);
                Eigen::VectorXd trial = theta0 + delta;
                trial[0] = std::clamp(trial[0], -1.0, 1.0);
                double trial_cost = cost(trial);
                if (std::isfinite(trial_cost) && trial_cost <= current) {
                    double rel = (current - trial_cost) / std::max(current, 1e-300);
                    theta0 = trial;
                    current = trial_cost;
                    lambda = std::max(lambda / 3.0, 1e-12);
                    stepped = true;
                    if (rel < 1e-10 || current < 1e-28)
                        converged = true;
                    break;
                }
                lambda *= 7.0;
            }
            if (!stepped)
                converged = true;  // no admissible step left at huge damping
        }
        out_cost = current;
        out_converged = converged;
        return theta0;
    };

    std::vector<Eigen::VectorXd> starts{detail::initial_guess(pts, model.n_terms)};
    if (model.n_terms == 2) {
        starts = detail::double_exp_starts(pts, starts[0]);
        // A start grown out of the single-exponential optimum.
        FitResult single = lm_fit(series, Ansatz::single_exp);
        if (!single.degenerate) {
            Eigen::VectorXd from_single(5);
            from_single << single.A, 0.9 * single.B[0], std::log(std::max(single.C[0], 1e-6)),
                0.1 * single.B[0], std::log(std::max(2.0 * single.C[0], 1e-6));
            starts.push_back(from_single);
        }
    }
    Eigen::VectorXd theta;
    double current = std::numeric_limits<double>::infinity();
    bool converged = false;
    for (const auto& start : starts) {
        double c = 0.0;
        bool conv = false;
        Eigen::VectorXd candidate = minimize_from(start, c, conv);
        if (c < current) {
            current = c;
            theta = candidate;
            converged = conv;
        }
    }

    result.converged = converged;
    result.A = std::clamp(theta[0], -1.0, 1.0);
    for (int t = 0; t < model.n_terms; t++) {
        result.B.push_back(theta[1 + 2 * t]);
        result.C.push_back(std::exp(theta[2 + 2 * t]));
    }
    result.extrapolated = result.A;

    // Covariance in (A, B_i, C_i) coordinates via the log-C chain rule.
    for (int i = 0; i < n_pts; i++) {
        model.jacobian_row(theta, pts[i].d, row);
        jac.row(i) = w[i] * row.transpose();
    }
    Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::MatrixXd cov_internal = jtj.completeOrthogonalDecomposition().pseudoInverse();
    Eigen::MatrixXd t_chain = Eigen::MatrixXd::Identity(n_params, n_params);
    for (int t = 0; t < model.n_terms; t++)
        t_chain(2 + 2 * t, 2 + 2 * t) = result.C[t];
    result.covariance = t_chain * cov_internal * t_chain.transpose();

    double ss_res = 0.0, ss_tot = 0.0, mean = 0.0;
    for (const auto& p : pts)
        mean += p.ev;
    mean /= n_pts;
    for (const auto& p : pts) {
        double r = result.evaluate(p.d) - p.ev;
        ss_res += r * r;
        ss_tot += (p.ev - mean) * (p.ev - mean);
    }
    result.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;

    // A double exponential with merged decay rates carries a singular
    // covariance; collapse and refit.
    if (ansatz == Ansatz::double_exp && std::abs(result.C[0] - result.C[1]) < 1e-6) {
        FitResult single = lm_fit(series, Ansatz::single_exp);
        single.collapsed_to_single = true;
        return single;
    }
    return result;
}

/// Richardson extrapolation adapted to distances: noise parameters are the
/// inverse distances, so the zero-noise value is
/// sum_k y_k prod_{i != k} d_k / (d_k - d_i) over the fit points.
inline double richardson_extrapolate(const DataSeries& series) {
    series.validate();
    std::vector<SeriesPoint> pts = series.fit_points();
    if (pts.empty())
        throw std::invalid_argument("richardson_extrapolate: no fit points");
    for (size_t i = 0; i < pts.size(); i++)
        for (size_t j = i + 1; j < pts.size(); j++)
            if (pts[i].d == pts[j].d)
                throw std::invalid_argument("richardson_extrapolate: duplicate distances");
    double total = 0.0;
    for (size_t k = 0; k < pts.size(); k++) {
        double coeff = 1.0;
        for (size_t i = 0; i < pts.size(); i++) {
            if (i == k)
                continue;
            coeff *= static_cast<double>(pts[k].d) / static_cast<double>(pts[k].d - pts[i].d);
        }
        total += coeff * pts[k].ev;
    }
    return total;
}

/// Per-point binomial resampling of the series, refitting each trial.
/// Returns the empirical distribution of the extrapolated value.
inline std::vector<double> bootstrap(
    const DataSeries& series, Ansatz ansatz, int trials = 1000, uint64_t seed = 0) {
    std::vector<double> samples;
    samples.reserve(trials);
    for (int t = 0; t < trials; t++) {
        Xoshiro256 rng(seed, static_cast<uint64_t>(t));
        DataSeries resampled = series;
        for (auto& p : resampled.points) {
            if (p.n_shots == 0 || p.std_err == 0.0)
                continue;  // degenerate sampling distribution, point is exact
            double q = std::clamp((1.0 - p.ev) / 2.0, 0.0, 1.0);
            double n = static_cast<double>(p.n_shots);
            double mu = n * q;
            double var = n * q * (1.0 - q);
            double k = var > 0.0 ? std::round(mu + std::sqrt(var) * rng.normal()) : mu;
            k = std::clamp(k, 0.0, n);
            double q_new = k / n;
            p.ev = 1.0 - 2.0 * q_new;
            p.std_err = 2.0 * std::sqrt(q_new * (1.0 - q_new) / n);
        }
        if (ansatz == Ansatz::richardson) {
            samples.push_back(richardson_extrapolate(resampled));
        } else {
            samples.push_back(lm_fit(resampled, ansatz).extrapolated);
        }
    }
    return samples;
}

inline double percentile(std::vector<double> samples, double q) {
    if (samples.empty())
        throw std::invalid_argument("percentile: empty sample set");
    std::sort(samples.begin(), samples.end());
    double pos = q / 100.0 * (static_cast<double>(samples.size()) - 1.0);
    size_t lo = static_cast<size_t>(std::floor(pos));
    size_t hi = std::min(samples.size() - 1, lo + 1);
    double frac = pos - static_cast<double>(lo);
    return samples[lo] * (1.0 - frac) + samples[hi] * frac;
}

/// R^2 over the fit points: 1 - SS_res / SS_tot.
inline double r2_score(const DataSeries& series, const FitResult& fit) {
    std::vector<SeriesPoint> pts = series.fit_points();
    if (pts.size() < 2)
        throw std::invalid_argument("r2_score: needs at least 2 fit points");
    double mean = 0.0;
    for (const auto& p : pts)
        mean += p.ev;
    mean /= static_cast<double>(pts.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (const auto& p : pts) {
        double r = fit.evaluate(p.d) - p.ev;
        ss_res += r * r;
        ss_tot += (p.ev - mean) * (p.ev - mean);
    }
    if (ss_tot == 0.0) {
        if (ss_res < 1e-24)
            return 1.0;
        throw std::domain_error("r2_score: zero variance with nonzero residuals");
    }
    return 1.0 - ss_res / ss_tot;
}

struct EffectiveDistance {
    double d_eff = 0.0;
    bool valid = false;
    double intercept = 0.0;  // log10-error line: log10|err| = intercept + slope * d
    double slope = 0.0;
};

/// Fits log10 |ev_k - true_ev| linearly in d over the fit points and reads
/// off the distance whose single-experiment error matches the given
/// extrapolation error. Evaluation-only: requires the true value.
inline EffectiveDistance effective_distance(const DataSeries& series, double ide_error, double true_ev) {
    std::vector<SeriesPoint> pts = series.fit_points();
    if (pts.size() < 2)
        throw std::invalid_argument("effective_distance: needs at least 2 fit points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : pts) {
        double err = std::abs(p.ev - true_ev);
        if (err <= 0.0)
            throw std::invalid_argument("effective_distance: a fit point has zero error");
        double x = p.d, y = std::log10(err);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double n = static_cast<double>(pts.size());
    double denom = n * sxx - sx * sx;
    EffectiveDistance out;
    out.slope = (n * sxy - sx * sy) / denom;
    out.intercept = (sy - out.slope * sx) / n;
    if (out.slope >= 0.0)
        return out;  // errors fail to shrink with distance; d_eff undefined
    out.d_eff = (std::log10(std::abs(ide_error)) - out.intercept) / out.slope;
    out.valid = true;
    return out;
}

/// IR(d, d_max) = |E_d - E*| / |E_ext - E*|. Zero when the unmitigated
/// value is already exact; infinity when the extrapolation is exact.
inline double improvement_ratio(double e_d, double e_ext, double e_star) {
    double num = std::abs(e_d - e_star);
    double den = std::abs(e_ext - e_star);
    if (den == 0.0)
        return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return num / den;
}

struct ResourceSavings {
    double delta_d;
    double qubit_ratio;
};

/// Distance gained by an LER reduction factor f at a per-step suppression
/// ratio lambda: delta_d = 2 log f / log lambda. The qubit ratio compares
/// patch footprints, which scale with d^2.
inline ResourceSavings resource_savings(double lambda_factor, double f, int baseline_d) {
    if (!(lambda_factor > 1.0))
        throw std::invalid_argument("resource_savings: lambda must exceed 1");
    if (!(f >= 1.0))
        throw std::invalid_argument("resource_savings: f must be at least 1");
    double delta_d = 2.0 * std::log(f) / std::log(lambda_factor);
    double d_eff = static_cast<double>(baseline_d) + delta_d;
    double ratio = (d_eff / static_cast<double>(baseline_d)) * (d_eff / static_cast<double>(baseline_d));
    return {delta_d, ratio};
}

}  // namespace dextra

#endif
