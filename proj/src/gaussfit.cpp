#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "evlf/turbstats.hpp"

namespace evlf {

double gaussian2d_value(const GaussianFit& p, double x, double y) {
    const double dx = (x - p.cx) / p.sigma_x;
    const double dy = (y - p.cy) / p.sigma_y;
    return p.amplitude * std::exp(-0.5 * (dx * dx + dy * dy)) + p.offset;
}

void gaussian2d_jacobian(const GaussianFit& p, double x, double y, double out[6]) {
    const double dx = x - p.cx;
    const double dy = y - p.cy;
    const double sx2 = p.sigma_x * p.sigma_x;
    const double sy2 = p.sigma_y * p.sigma_y;
    const double e = std::exp(-0.5 * (dx * dx / sx2 + dy * dy / sy2));
    out[0] = e;                                          // dA
    out[1] = 1.0;                                        // dB
    out[2] = p.amplitude * e * dx / sx2;                 // dcx
    out[3] = p.amplitude * e * dy / sy2;                 // dcy
    out[4] = p.amplitude * e * dx * dx / (sx2 * p.sigma_x);  // dsigma_x
    out[5] = p.amplitude * e * dy * dy / (sy2 * p.sigma_y);  // dsigma_y
}

GaussianFit moment_init(const Frame& patch) {
    patch.validate();
    double lo = patch.pixels[0], hi = patch.pixels[0];
    for (double v : patch.pixels) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double contrast = hi - lo;
    if (contrast <= 1e-12) throw NumericError("flat patch: no contrast to fit");

    // Background-subtracted intensity moments.
    double w_sum = 0, mx = 0, my = 0;
    for (int y = 0; y < patch.height; ++y)
        for (int x = 0; x < patch.width; ++x) {
            const double w = patch.at(x, y) - lo;
            w_sum += w;
            mx += w * x;
            my += w * y;
        }
    if (w_sum <= 1e-12) throw NumericError("flat patch: no contrast to fit");
    mx /= w_sum;
    my /= w_sum;
    double vx = 0, vy = 0;
    for (int y = 0; y < patch.height; ++y)
        for (int x = 0; x < patch.width; ++x) {
            const double w = patch.at(x, y) - lo;
            vx += w * (x - mx) * (x - mx);
            vy += w * (y - my) * (y - my);
        }
    vx /= w_sum;
    vy /= w_sum;

    GaussianFit init;
    init.amplitude = contrast;
    init.offset = lo;
    init.cx = mx;
    init.cy = my;
    init.sigma_x = std::max(0.5, std::sqrt(std::max(vx, 1e-6)));
    init.sigma_y = std::max(0.5, std::sqrt(std::max(vy, 1e-6)));
    return init;
}

namespace {

double fit_cost(const Frame& patch, const GaussianFit& p) {
    double cost = 0.0;
    for (int y = 0; y < patch.height; ++y)
        for (int x = 0; x < patch.width; ++x) {
            const double r = gaussian2d_value(p, x, y) - patch.at(x, y);
            cost += r * r;
        }
    return cost;
}

}  // namespace

GaussianFit fit_gaussian2d(const Frame& patch, const GaussianFit& init) {
    constexpr int kMaxIterations = 200;
    constexpr double kRelTol = 1e-10;
    constexpr double kMaxDamping = 1e12;
    constexpr double kSigmaFloor = 0.1;

    const int n = patch.width * patch.height;
    GaussianFit p = init;
    double cost = fit_cost(patch, p);
    double damping = 1e-3;
    int iterations = 0;

    Eigen::MatrixXd jtj(6, 6);
    Eigen::VectorXd jtr(6);

    bool done = false;
    while (!done && iterations < kMaxIterations) {
        ++iterations;
        jtj.setZero();
        jtr.setZero();
        double row[6];
        for (int y = 0; y < patch.height; ++y)
            for (int x = 0; x < patch.width; ++x) {
                gaussian2d_jacobian(p, x, y, row);
                const double r = gaussian2d_value(p, x, y) - patch.at(x, y);
                for (int i = 0; i < 6; ++i) {
                    jtr(i) += row[i] * r;
                    for (int j = i; j < 6; ++j) jtj(i, j) += row[i] * row[j];
                }
            }
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < i; ++j) jtj(i, j) = jtj(j, i);

        if (jtr.lpNorm<Eigen::Infinity>() < 1e-14 || cost <= kRelTol) break;

        bool stepped = false;
        while (damping <= kMaxDamping) {
            Eigen::MatrixXd a = jtj;
            // Marquardt scaling with a small absolute floor so degenerate
            // directions stay solvable.
            for (int i = 0; i < 6; ++i) a(i, i) += damping * (jtj(i, i) + 1e-12);
            const Eigen::VectorXd step = a.ldlt().solve(-jtr);

            GaussianFit candidate = p;
            candidate.amplitude += step(0);
            candidate.offset += step(1);
            candidate.cx += step(2);
            candidate.cy += step(3);
            candidate.sigma_x += step(4);
            candidate.sigma_y += step(5);

            double new_cost = std::numeric_limits<double>::infinity();
            if (std::isfinite(candidate.sigma_x) && std::isfinite(candidate.sigma_y) &&
                candidate.sigma_x > 1e-6 && candidate.sigma_y > 1e-6)
                new_cost = fit_cost(patch, candidate);

            if (new_cost <= cost) {
                const double improvement = cost - new_cost;
                p = candidate;
                done = improvement <= kRelTol * std::max(cost, 1e-300);
                cost = new_cost;
                damping = std::max(damping * 0.1, 1e-12);
                stepped = true;
                break;
            }
            damping *= 10.0;
        }
        if (!stepped) throw NumericError("gaussian fit diverged (no acceptable step)");
    }

    if (p.sigma_x < kSigmaFloor || p.sigma_y < kSigmaFloor)
        throw NumericError("gaussian fit sigma collapsed below 0.1 px");

    p.rms_residual = std::sqrt(cost / n);
    p.iterations = iterations;
    return p;
}

}  // namespace evlf
