#include <algorithm>
#include <cmath>

#include "colopred/error.hpp"
#include "colopred/model.hpp"

namespace colopred::model {

namespace {

double sigmoid(double s) {
    if (s >= 0.0) return 1.0 / (1.0 + std::exp(-s));
    const double e = std::exp(s);
    return e / (1.0 + e);
}

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

}  // namespace

LinearModel train_logistic_elasticnet(const FeatureMatrix& X, const std::vector<Label>& y,
                                      double l1, double l2, int epochs, std::uint64_t seed,
                                      ClassWeight class_weight) {
    (void)seed;  // full-batch descent from zero init is already deterministic
    if (X.rows() != y.size())
        throw Error(Errc::length_mismatch, "X and y row counts differ");
    if (X.rows() < 2)
        throw Error(Errc::degenerate_input, "need at least 2 training rows");
    for (double v : X.data)
        if (v != v)
            throw Error(Errc::missing_values, "training matrix contains missing values");
    if (!(l1 >= 0.0) || !(l2 >= 0.0) || epochs < 1)
        throw Error(Errc::bad_format, "invalid elastic-net configuration");

    const std::size_t n = X.rows(), p = X.cols();
    std::size_t n_high = 0;
    for (Label l : y) n_high += l == Label::High ? 1 : 0;
    if (n_high == 0 || n_high == n)
        throw Error(Errc::single_class_training, "training labels contain a single class");

    std::vector<double> w(n, 1.0);
    if (class_weight == ClassWeight::balanced) {
        const double wh = static_cast<double>(n) / (2.0 * static_cast<double>(n_high));
        const double wl = static_cast<double>(n) / (2.0 * static_cast<double>(n - n_high));
        for (std::size_t i = 0; i < n; ++i) w[i] = y[i] == Label::High ? wh : wl;
    }
    std::vector<double> yv(n);
    for (std::size_t i = 0; i < n; ++i) yv[i] = y[i] == Label::High ? 1.0 : 0.0;

    // Proximal gradient (ISTA) with a Lipschitz step for the smooth part:
    // L <= max_w * ||X'||_F^2 / (4n) + l2, X' including the bias column.
    double fro = static_cast<double>(n);  // bias column of ones
    for (double v : X.data) fro += v * v;
    double max_w = 0.0;
    for (double v : w) max_w = std::max(max_w, v);
    const double lips = max_w * fro / (4.0 * static_cast<double>(n)) + l2;
    const double step = 1.0 / std::max(lips, 1e-12);
    const double tol = 1e-7;

    LinearModel model;
    model.feature_names = X.names;
    model.weights.assign(p, 0.0);
    model.l1 = l1;
    model.l2 = l2;
    model.converged = false;

    std::vector<double> margin(n), grad(p);
    for (int epoch = 0; epoch < epochs; ++epoch) {
        for (std::size_t i = 0; i < n; ++i) {
            double s = model.bias;
            const double* row = X.data.data() + i * p;
            for (std::size_t j = 0; j < p; ++j) s += model.weights[j] * row[j];
            margin[i] = w[i] * (sigmoid(s) - yv[i]);
        }
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_bias = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = X.data.data() + i * p;
            grad_bias += margin[i];
            for (std::size_t j = 0; j < p; ++j) grad[j] += margin[i] * row[j];
        }
        const double inv_n = 1.0 / static_cast<double>(n);
        double move = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
            const double g = grad[j] * inv_n + l2 * model.weights[j];
            const double next = soft_threshold(model.weights[j] - step * g, step * l1);
            move = std::max(move, std::abs(next - model.weights[j]));
            model.weights[j] = next;
        }
        const double next_bias = model.bias - step * grad_bias * inv_n;
        move = std::max(move, std::abs(next_bias - model.bias));
        model.bias = next_bias;
        if (move / step < tol) {
            model.converged = true;
            break;
        }
    }
    return model;
}

double predict_proba(const LinearModel& model, std::span<const double> row) {
    double s = model.bias;
    for (std::size_t j = 0; j < model.weights.size(); ++j) s += model.weights[j] * row[j];
    return sigmoid(s);
}

}  // namespace colopred::model
