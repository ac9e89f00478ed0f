#pragma once

#include "headtrack/geometry.hpp"

#include <vector>

namespace headtrack {

// Least-squares polynomial smoothing / differentiation over a sliding window.
// Interior samples use the central convolution weights; the first and last
// half-windows fit the polynomial to the first/last full window and evaluate
// it at the off-center positions, so output length equals input length.
class SavitzkyGolay {
  public:
    SavitzkyGolay(int window, int degree, double dt) : window_(window), degree_(degree), dt_(dt) {
        if (window < 1 || window % 2 == 0) throw InvalidConfig("savgol: window must be odd and positive");
        if (degree < 0 || degree >= window) throw InvalidConfig("savgol: need window > degree >= 0");
        if (!(dt > 0.0)) throw InvalidConfig("savgol: dt must be positive");

        const int half = window / 2;
        Eigen::MatrixXd a(window, degree + 1);
        for (int i = 0; i < window; ++i) {
            double v = 1.0;
            for (int j = 0; j <= degree; ++j) {
                a(i, j) = v;
                v *= static_cast<double>(i - half);
            }
        }
        // pinv = (A^T A)^-1 A^T maps window samples to polynomial coefficients.
        pinv_ = (a.transpose() * a).ldlt().solve(a.transpose());

        // Weight rows for every (derivative, evaluation offset) pair.
        for (int d = 0; d <= 2; ++d) {
            weights_[d].resize(window);
            for (int e = -half; e <= half; ++e) {
                Eigen::RowVectorXd eval = Eigen::RowVectorXd::Zero(degree + 1);
                for (int j = d; j <= degree; ++j) {
                    double fact = 1.0;
                    for (int k = 0; k < d; ++k) fact *= static_cast<double>(j - k);
                    eval(j) = fact * std::pow(static_cast<double>(e), j - d);
                }
                weights_[d][e + half] = eval * pinv_;
            }
        }
    }

    int window() const { return window_; }
    int degree() const { return degree_; }

    // Convolution weights for a given derivative order at a window offset
    // (0 = center). Time scaling (dt^-deriv) is not included.
    const Eigen::RowVectorXd& weights(int deriv, int offset = 0) const {
        check_deriv(deriv);
        return weights_[deriv][offset + window_ / 2];
    }

    // Filters each column of `series` (rows are uniformly spaced samples).
    Eigen::MatrixXd filter(const Eigen::MatrixXd& series, int deriv) const {
        check_deriv(deriv);
        const int n = static_cast<int>(series.rows());
        if (n < window_) throw InvalidConfig("savgol: series shorter than window");

        const int half = window_ / 2;
        const double scale = 1.0 / std::pow(dt_, deriv);
        Eigen::MatrixXd out(n, series.cols());
        for (int k = 0; k < n; ++k) {
            int start = std::clamp(k - half, 0, n - window_);
            const int offset = k - (start + half);
            out.row(k) = weights(deriv, offset) * series.middleRows(start, window_) * scale;
        }
        return out;
    }

    std::vector<double> filter(const std::vector<double>& series, int deriv) const {
        Eigen::MatrixXd m(series.size(), 1);
        for (size_t i = 0; i < series.size(); ++i) m(i, 0) = series[i];
        const Eigen::MatrixXd f = filter(m, deriv);
        std::vector<double> out(series.size());
        for (size_t i = 0; i < series.size(); ++i) out[i] = f(i, 0);
        return out;
    }

  private:
    static void check_deriv(int deriv) {
        if (deriv < 0 || deriv > 2) throw InvalidConfig("savgol: deriv must be 0, 1 or 2");
    }

    int window_;
    int degree_;
    double dt_;
    Eigen::MatrixXd pinv_;
    std::array<std::vector<Eigen::RowVectorXd>, 3> weights_;
};

}  // namespace headtrack
