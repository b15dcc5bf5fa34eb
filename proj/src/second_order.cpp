#include "ucc/second_order.hpp"

#include <cmath>

#include "ucc/special.hpp"

namespace ucc {

namespace {

std::vector<PriorSpec> default_input_priors(const ChannelFamily& fam, const std::vector<PriorSpec>& given) {
    if (!given.empty()) {
        if (int(given.size()) != fam.input_count())
            throw std::invalid_argument("experiment: one input prior per input symbol");
        return given;
    }
    return std::vector<PriorSpec>(fam.input_count(), PriorSpec::mean_dirichlet(0.5));
}

}  // namespace

ExponentFit fit_exponent(const ChannelPoint& pt, const ExponentExperimentSpec& spec) {
    if (spec.n_list.size() < 4) throw std::invalid_argument("fit_exponent: need at least 4 blocklengths");
    const auto fam = pt.family;
    ExponentFit fit;
    fit.r = spec.rate_r;
    if (spec.rate_r1) {
        fit.r1 = *spec.rate_r1;
        if (!(fit.r1 > fit.r)) throw std::invalid_argument("fit_exponent: need R1 > R");
        const auto rep = exponent_lower_bound(spec.input_dist, pt, fit.r, fit.r1);
        fit.bound = rep.bound;
        fit.s_star = rep.s_star;
    } else {
        const auto opt = optimal_r1(spec.input_dist, pt, fit.r);
        fit.r1 = opt.r1;
        fit.bound = opt.bound;
        fit.s_star = opt.s_star;
    }
    const auto priors = default_input_priors(*fam, spec.input_priors);

    for (int n : spec.n_list) {
        const CompositionType comp = round_to_type(spec.input_dist, n);
        CodeEnsemble ens(fam, comp, fit.r, fit.r1, priors, spec.output_prior, spec.qp_kind);
        ExponentCell cell;
        cell.n = n;
        cell.r1 = fit.r1;
        cell.log_m = ens.size().log_m;
        cell.est = estimate_error_random_coding(ens, pt, spec.trials, mix64(spec.seed ^ std::uint64_t(n)));
        if (cell.est.errors == 0) {
            cell.zero_substituted = true;
            fit.fit_usable = false;
            cell.exponent_point = -std::log(1.0 / double(spec.trials + 1)) / n;
        } else {
            cell.exponent_point = -std::log(cell.est.estimate) / n;
        }
        fit.cells.push_back(cell);
    }

    // asymptote model: -(1/n) log e_n = E + c / n
    const std::size_t m = fit.cells.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& c : fit.cells) {
        const double x = 1.0 / double(c.n);
        sx += x;
        sy += c.exponent_point;
        sxx += x * x;
        sxy += x * c.exponent_point;
    }
    const double det = double(m) * sxx - sx * sx;
    const double slope = (double(m) * sxy - sx * sy) / det;
    fit.fitted_exponent = (sy - slope * sx) / double(m);
    double ss_res = 0;
    for (const auto& c : fit.cells) {
        const double pred = fit.fitted_exponent + slope / double(c.n);
        ss_res += (c.exponent_point - pred) * (c.exponent_point - pred);
    }
    const double sigma2 = m > 2 ? ss_res / double(m - 2) : 0.0;
    fit.std_error = std::sqrt(sigma2 * sxx / det);
    fit.pass = fit.fitted_exponent >= fit.bound - 2 * fit.std_error;
    return fit;
}

SecondOrderRun run_second_order(const ChannelPoint& theta1_point, const SecondOrderSpec& spec) {
    const auto fam = theta1_point.family;
    if (spec.n_list.empty()) throw std::invalid_argument("run_second_order: empty blocklength list");
    SecondOrderRun run;
    run.mutual_info = mutual_information(spec.input_dist, theta1_point);
    run.dispersion_v = dispersion(spec.input_dist, theta1_point);
    if (!(run.dispersion_v > 0)) throw std::invalid_argument("run_second_order: dispersion must be positive");
    run.r1_star = run.mutual_info;
    if (spec.r1_star && std::fabs(*spec.r1_star - run.r1_star) > 1e-6)
        throw std::invalid_argument("run_second_order: supplied first-order rate differs from I(P, W_theta1)");
    if (spec.r2_star)
        run.r2_star = *spec.r2_star;
    else if (spec.epsilon)
        run.r2_star = std::sqrt(run.dispersion_v) * std_normal_quantile(*spec.epsilon);
    else
        throw std::invalid_argument("run_second_order: need either r2_star or epsilon");

    std::vector<double> theta2 = spec.theta2;
    if (theta2.empty()) theta2.assign(fam->param_dim(), 0.0);
    if (int(theta2.size()) != fam->param_dim()) throw std::invalid_argument("run_second_order: theta2 dimension");
    bool theta2_zero = true;
    for (double v : theta2)
        if (v != 0) theta2_zero = false;
    run.f_shift = theta2_zero ? 0.0 : local_shift(spec.input_dist, fam, theta1_point.theta, theta2);
    run.limit_epsilon = std_normal_cdf((run.r2_star - run.f_shift) / std::sqrt(run.dispersion_v));

    const auto priors = default_input_priors(*fam, spec.input_priors);
    for (int n : spec.n_list) {
        const double sqn = std::sqrt(double(n));
        std::vector<double> theta_n = theta1_point.theta;
        for (std::size_t i = 0; i < theta_n.size(); ++i) theta_n[i] += theta2[i] / sqn;
        ChannelPoint pt_n(fam, theta_n);

        const double rate_r = run.r1_star + run.r2_star / sqn;
        const double rate_r1 = rate_r + std::pow(double(n), -2.0 / 3.0);
        const CompositionType comp = round_to_type(spec.input_dist, n);
        CodeEnsemble ens(fam, comp, rate_r, rate_r1, priors, spec.output_prior, spec.qp_kind);

        SecondOrderCell cell;
        cell.n = n;
        cell.theta = theta_n;
        cell.r1 = rate_r1;
        cell.log_m = ens.size().log_m;
        cell.est = estimate_error_random_coding(ens, pt_n, spec.trials, mix64(spec.seed ^ std::uint64_t(n)));
        run.cells.push_back(std::move(cell));
    }
    return run;
}

}  // namespace ucc
