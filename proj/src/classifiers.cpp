#include "emoscreen/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace emoscreen {

std::vector<int> LabeledDataset::label_set() const {
    std::set<int> s(labels.begin(), labels.end());
    return {s.begin(), s.end()};
}

void LabeledDataset::validate(int min_classes) const {
    if (features.size() != labels.size()) {
        throw data_error("dataset: feature/label count mismatch");
    }
    if (features.empty()) throw data_error("dataset: empty");
    const std::size_t dim = features[0].size();
    if (dim == 0) throw data_error("dataset: zero-dimensional features");
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (features[i].size() != dim) {
            throw data_error("dataset: inconsistent dimension at sample " + std::to_string(i));
        }
        for (float v : features[i]) {
            if (!std::isfinite(v)) {
                throw data_error("dataset: non-finite feature at sample " + std::to_string(i));
            }
        }
    }
    if (static_cast<int>(label_set().size()) < min_classes) {
        throw data_error("dataset: needs at least " + std::to_string(min_classes) +
                         " distinct labels");
    }
}

Standardizer Standardizer::fit(const LabeledDataset& data) {
    const int d = data.dimension();
    const double n = static_cast<double>(data.size());
    std::vector<double> mean(d, 0.0);
    std::vector<double> sq(d, 0.0);
    for (const auto& x : data.features) {
        for (int j = 0; j < d; ++j) {
            mean[j] += x[j];
            sq[j] += static_cast<double>(x[j]) * x[j];
        }
    }
    Standardizer s;
    s.mean.resize(d);
    s.inv_std.resize(d);
    for (int j = 0; j < d; ++j) {
        mean[j] /= n;
        const double var = std::max(sq[j] / n - mean[j] * mean[j], 0.0);
        const double sd = std::sqrt(var);
        s.mean[j] = static_cast<float>(mean[j]);
        s.inv_std[j] = static_cast<float>(sd > 1e-12 ? 1.0 / sd : 1.0);
    }
    return s;
}

std::vector<float> Standardizer::apply(std::span<const float> x) const {
    if (x.size() != mean.size()) {
        throw data_error("standardizer: dimension mismatch, expected " +
                         std::to_string(mean.size()) + ", got " + std::to_string(x.size()));
    }
    std::vector<float> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) out[j] = (x[j] - mean[j]) * inv_std[j];
    return out;
}

namespace {

double kernel_value(const KernelSpec& kernel, std::span<const float> a, std::span<const float> b) {
    if (kernel.kind == KernelSpec::Kind::Linear) {
        double dot = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) dot += static_cast<double>(a[j]) * b[j];
        return dot;
    }
    double d2 = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = static_cast<double>(a[j]) - b[j];
        d2 += diff * diff;
    }
    return std::exp(-static_cast<double>(kernel.gamma) * d2);
}

// Two-class soft-margin dual solved by maximal-violating-pair SMO
// (first-order working-set selection, stop when the KKT gap < tol).
struct BinarySolveResult {
    std::vector<double> alpha;
    double rho = 0.0;
};

BinarySolveResult solve_binary_svm(const std::vector<std::span<const float>>& x,
                                   const std::vector<int>& y, const KernelSpec& kernel, double C,
                                   double tol) {
    const std::size_t n = x.size();
    std::vector<double> alpha(n, 0.0);
    std::vector<double> grad(n, -1.0);
    std::vector<double> kdiag(n);
    for (std::size_t t = 0; t < n; ++t) kdiag[t] = kernel_value(kernel, x[t], x[t]);

    // Cache the full kernel matrix when small enough; otherwise recompute rows.
    const bool cache = n * n <= (std::size_t{1} << 22);
    std::vector<double> kmat;
    if (cache) {
        kmat.resize(n * n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                const double v = kernel_value(kernel, x[i], x[j]);
                kmat[i * n + j] = v;
                kmat[j * n + i] = v;
            }
        }
    }
    std::vector<double> row_i(cache ? 0 : n), row_j(cache ? 0 : n);
    auto kernel_row = [&](std::size_t t, std::vector<double>& scratch) -> const double* {
        if (cache) return &kmat[t * n];
        for (std::size_t s = 0; s < n; ++s) scratch[s] = kernel_value(kernel, x[t], x[s]);
        return scratch.data();
    };

    const double tau = 1e-12;
    const std::size_t max_iter = std::max<std::size_t>(10'000'000 / std::max<std::size_t>(n, 1),
                                                       100 * n + 1000);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        // i in I_up maximizing -y*G; j in I_low minimizing -y*G.
        std::ptrdiff_t i = -1, j = -1;
        double gmax = -std::numeric_limits<double>::infinity();
        double gmin = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n; ++t) {
            const double v = -y[t] * grad[t];
            const bool in_up = (y[t] > 0 && alpha[t] < C) || (y[t] < 0 && alpha[t] > 0);
            const bool in_low = (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < C);
            if (in_up && v > gmax) {
                gmax = v;
                i = static_cast<std::ptrdiff_t>(t);
            }
            if (in_low && v < gmin) {
                gmin = v;
                j = static_cast<std::ptrdiff_t>(t);
            }
        }
        if (i < 0 || j < 0 || gmax - gmin < tol) break;

        const double* K_i = kernel_row(static_cast<std::size_t>(i), row_i);
        const double* K_j = kernel_row(static_cast<std::size_t>(j), row_j);
        const double old_ai = alpha[i];
        const double old_aj = alpha[j];
        // Curvature uses the Q matrix (Q_ij = y_i y_j K_ij), not the raw kernel.
        const double q_ij = y[i] * y[j] * K_i[j];

        if (y[i] != y[j]) {
            double quad = kdiag[i] + kdiag[j] + 2.0 * q_ij;
            if (quad <= 0) quad = tau;
            const double delta = (-grad[i] - grad[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0) {
                if (alpha[j] < 0) {
                    alpha[j] = 0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = -diff;
            }
            if (diff > 0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            double quad = kdiag[i] + kdiag[j] - 2.0 * q_ij;
            if (quad <= 0) quad = tau;
            const double delta = (grad[i] - grad[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0) {
                alpha[j] = 0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = sum;
            }
        }

        const double dai = alpha[i] - old_ai;
        const double daj = alpha[j] - old_aj;
        for (std::size_t t = 0; t < n; ++t) {
            grad[t] += y[t] * (y[i] * K_i[t] * dai + y[j] * K_j[t] * daj);
        }
    }

    // rho such that f(x) = sum alpha_i y_i K(x_i, x) - rho.
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    int nr_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * grad[t];
        const bool upper = alpha[t] >= C - 1e-12;
        const bool lower = alpha[t] <= 1e-12;
        if (upper && !lower) {
            if (y[t] < 0) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else if (lower) {
            if (y[t] > 0) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else {
            ++nr_free;
            sum_free += yg;
        }
    }
    BinarySolveResult result;
    result.alpha = std::move(alpha);
    result.rho = nr_free > 0 ? sum_free / nr_free : (ub + lb) / 2.0;
    return result;
}

}  // namespace

SvmModel svm_fit(const LabeledDataset& data, KernelSpec kernel, double C) {
    data.validate(2);
    if (C <= 0) throw data_error("svm_fit: C must be positive");

    SvmModel model;
    model.labels = data.label_set();
    model.kernel = kernel;
    if (model.kernel.kind == KernelSpec::Kind::Rbf && model.kernel.gamma <= 0.0f) {
        model.kernel.gamma = 1.0f / static_cast<float>(data.dimension());
    }
    model.C = static_cast<float>(C);
    model.scaler = Standardizer::fit(data);

    std::vector<std::vector<float>> standardized(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        standardized[i] = model.scaler.apply(data.features[i]);
    }

    constexpr double kTol = 1e-3;
    for (std::size_t a = 0; a < model.labels.size(); ++a) {
        for (std::size_t b = a + 1; b < model.labels.size(); ++b) {
            std::vector<std::span<const float>> x;
            std::vector<int> y;
            for (std::size_t i = 0; i < data.size(); ++i) {
                if (data.labels[i] == model.labels[a]) {
                    x.emplace_back(standardized[i]);
                    y.push_back(+1);
                } else if (data.labels[i] == model.labels[b]) {
                    x.emplace_back(standardized[i]);
                    y.push_back(-1);
                }
            }
            BinarySolveResult solved = solve_binary_svm(x, y, model.kernel, C, kTol);

            BinarySvm machine;
            machine.first = model.labels[a];
            machine.second = model.labels[b];
            std::vector<double> coefs;
            for (std::size_t i = 0; i < x.size(); ++i) {
                if (solved.alpha[i] > 1e-12) {
                    machine.support_vectors.emplace_back(x[i].begin(), x[i].end());
                    coefs.push_back(solved.alpha[i] * y[i]);
                }
            }
            // Round duals to f32 storage, then re-project one in-box coef so
            // the equality constraint survives the rounding.
            machine.dual_coefs.assign(coefs.begin(), coefs.end());
            double residual = 0.0;
            for (float c : machine.dual_coefs) residual += c;
            for (std::size_t i = 0; i < machine.dual_coefs.size(); ++i) {
                const double adjusted = machine.dual_coefs[i] - residual;
                if (std::abs(adjusted) <= C && adjusted * machine.dual_coefs[i] > 0.0) {
                    machine.dual_coefs[i] = static_cast<float>(adjusted);
                    break;
                }
            }
            residual = 0.0;
            for (float c : machine.dual_coefs) residual += c;
            machine.equality_residual = std::abs(residual);
            machine.bias = static_cast<float>(-solved.rho);
            model.machines.push_back(std::move(machine));
        }
    }
    return model;
}

namespace {

double binary_decision(const BinarySvm& machine, const KernelSpec& kernel,
                       std::span<const float> x) {
    double f = machine.bias;
    for (std::size_t i = 0; i < machine.support_vectors.size(); ++i) {
        f += machine.dual_coefs[i] * kernel_value(kernel, machine.support_vectors[i], x);
    }
    return f;
}

}  // namespace

std::vector<double> svm_scores(const SvmModel& model, std::span<const float> x) {
    const std::vector<float> z = model.scaler.apply(x);
    std::vector<double> votes(model.labels.size(), 0.0);
    for (const auto& machine : model.machines) {
        const double f = binary_decision(machine, model.kernel, z);
        const int winner = f >= 0.0 ? machine.first : machine.second;
        const auto it = std::lower_bound(model.labels.begin(), model.labels.end(), winner);
        votes[static_cast<std::size_t>(it - model.labels.begin())] += 1.0;
    }
    const double total = static_cast<double>(model.machines.size());
    for (double& v : votes) v /= total;
    return votes;
}

int svm_predict(const SvmModel& model, std::span<const float> x) {
    const std::vector<double> scores = svm_scores(model, x);
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) best = i;
    }
    return model.labels[best];
}

namespace {

// Cholesky solve of the (regularized, SPD) pooled covariance system.
std::vector<double> cholesky_solve(std::vector<double> a, std::vector<double> b, int d) {
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = a[static_cast<std::size_t>(i) * d + j];
            for (int k = 0; k < j; ++k) {
                sum -= a[static_cast<std::size_t>(i) * d + k] *
                       a[static_cast<std::size_t>(j) * d + k];
            }
            if (i == j) {
                if (sum <= 0.0) throw data_error("lda: covariance not positive definite");
                a[static_cast<std::size_t>(i) * d + j] = std::sqrt(sum);
            } else {
                a[static_cast<std::size_t>(i) * d + j] =
                    sum / a[static_cast<std::size_t>(j) * d + j];
            }
        }
    }
    for (int i = 0; i < d; ++i) {
        double sum = b[i];
        for (int k = 0; k < i; ++k) sum -= a[static_cast<std::size_t>(i) * d + k] * b[k];
        b[i] = sum / a[static_cast<std::size_t>(i) * d + i];
    }
    for (int i = d - 1; i >= 0; --i) {
        double sum = b[i];
        for (int k = i + 1; k < d; ++k) sum -= a[static_cast<std::size_t>(k) * d + i] * b[k];
        b[i] = sum / a[static_cast<std::size_t>(i) * d + i];
    }
    return b;
}

}  // namespace

LdaModel lda_fit(const LabeledDataset& data) {
    data.validate(2);
    LdaModel model;
    model.labels = data.label_set();
    model.scaler = Standardizer::fit(data);
    const int d = data.dimension();
    const std::size_t k = model.labels.size();

    std::vector<std::vector<float>> z(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) z[i] = model.scaler.apply(data.features[i]);

    std::vector<std::vector<double>> means(k, std::vector<double>(d, 0.0));
    std::vector<double> counts(k, 0.0);
    auto class_index = [&](int label) {
        return static_cast<std::size_t>(
            std::lower_bound(model.labels.begin(), model.labels.end(), label) -
            model.labels.begin());
    };
    for (std::size_t i = 0; i < z.size(); ++i) {
        const std::size_t c = class_index(data.labels[i]);
        counts[c] += 1.0;
        for (int j = 0; j < d; ++j) means[c][j] += z[i][j];
    }
    for (std::size_t c = 0; c < k; ++c) {
        for (int j = 0; j < d; ++j) means[c][j] /= counts[c];
    }

    // Pooled within-class covariance with shrinkage lambda = 1e-6 * trace/d.
    std::vector<double> cov(static_cast<std::size_t>(d) * d, 0.0);
    for (std::size_t i = 0; i < z.size(); ++i) {
        const std::size_t c = class_index(data.labels[i]);
        for (int p = 0; p < d; ++p) {
            const double dp = z[i][p] - means[c][p];
            for (int q = 0; q <= p; ++q) {
                cov[static_cast<std::size_t>(p) * d + q] += dp * (z[i][q] - means[c][q]);
            }
        }
    }
    const double denom = std::max(1.0, static_cast<double>(data.size()) - static_cast<double>(k));
    double trace = 0.0;
    for (int p = 0; p < d; ++p) {
        for (int q = 0; q <= p; ++q) {
            const double v = cov[static_cast<std::size_t>(p) * d + q] / denom;
            cov[static_cast<std::size_t>(p) * d + q] = v;
            cov[static_cast<std::size_t>(q) * d + p] = v;
        }
        trace += cov[static_cast<std::size_t>(p) * d + p];
    }
    const double lambda = 1e-6 * trace / d;
    for (int p = 0; p < d; ++p) cov[static_cast<std::size_t>(p) * d + p] += lambda;

    model.weights.resize(k);
    model.offsets.resize(k);
    const double total = static_cast<double>(data.size());
    for (std::size_t c = 0; c < k; ++c) {
        const std::vector<double> w = cholesky_solve(cov, means[c], d);
        double mu_w = 0.0;
        for (int j = 0; j < d; ++j) mu_w += means[c][j] * w[j];
        model.weights[c].assign(w.begin(), w.end());
        model.offsets[c] = static_cast<float>(-0.5 * mu_w + std::log(counts[c] / total));
    }
    return model;
}

int lda_predict(const LdaModel& model, std::span<const float> x) {
    const std::vector<float> z = model.scaler.apply(x);
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < model.labels.size(); ++c) {
        double score = model.offsets[c];
        for (std::size_t j = 0; j < z.size(); ++j) {
            score += static_cast<double>(model.weights[c][j]) * z[j];
        }
        if (score > best_score) {
            best_score = score;
            best = c;
        }
    }
    return model.labels[best];
}

KnnModel knn_fit(const LabeledDataset& data, int k) {
    data.validate(2);
    if (k < 1) throw data_error("knn_fit: k must be >= 1");
    if (static_cast<std::size_t>(k) > data.size()) {
        throw data_error("knn_fit: k exceeds the sample count");
    }
    KnnModel model;
    model.labels = data.label_set();
    model.scaler = Standardizer::fit(data);
    model.k = k;
    model.points.resize(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) model.points[i] = model.scaler.apply(data.features[i]);
    model.point_labels = data.labels;
    return model;
}

int knn_predict(const KnnModel& model, std::span<const float> x) {
    const std::vector<float> z = model.scaler.apply(x);
    // (distance^2, insertion index); ties resolved by insertion order.
    std::vector<std::pair<double, std::size_t>> dist(model.points.size());
    for (std::size_t i = 0; i < model.points.size(); ++i) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < z.size(); ++j) {
            const double diff = static_cast<double>(model.points[i][j]) - z[j];
            d2 += diff * diff;
        }
        dist[i] = {d2, i};
    }
    const std::size_t k = static_cast<std::size_t>(model.k);
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    std::map<int, int> votes;
    for (std::size_t i = 0; i < k; ++i) votes[model.point_labels[dist[i].second]] += 1;
    int best_label = votes.begin()->first;
    int best_count = votes.begin()->second;
    for (const auto& [label, count] : votes) {
        if (count > best_count) {
            best_label = label;
            best_count = count;
        }
    }
    return best_label;
}

namespace {

double gini_impurity(const std::map<int, int>& counts, double total) {
    double g = 1.0;
    for (const auto& [label, count] : counts) {
        const double p = count / total;
        g -= p * p;
    }
    return g;
}

struct SplitChoice {
    bool found = false;
    int feature = -1;
    float threshold = 0.0f;
    double impurity = std::numeric_limits<double>::infinity();  // weighted child Gini
};

SplitChoice best_split(const LabeledDataset& data, const std::vector<std::size_t>& idx,
                       int min_leaf) {
    const int d = data.dimension();
    const double total = static_cast<double>(idx.size());
    SplitChoice best;
    std::vector<std::pair<float, int>> column(idx.size());
    for (int f = 0; f < d; ++f) {
        for (std::size_t i = 0; i < idx.size(); ++i) {
            column[i] = {data.features[idx[i]][f], data.labels[idx[i]]};
        }
        std::sort(column.begin(), column.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        std::map<int, int> left_counts;
        std::map<int, int> right_counts;
        for (const auto& [v, label] : column) right_counts[label] += 1;
        for (std::size_t i = 0; i + 1 < column.size(); ++i) {
            left_counts[column[i].second] += 1;
            auto rit = right_counts.find(column[i].second);
            if (--(rit->second) == 0) right_counts.erase(rit);
            if (column[i].first == column[i + 1].first) continue;  // not a boundary
            const std::size_t n_left = i + 1;
            const std::size_t n_right = column.size() - n_left;
            if (n_left < static_cast<std::size_t>(min_leaf) ||
                n_right < static_cast<std::size_t>(min_leaf)) {
                continue;
            }
            const double impurity =
                (n_left * gini_impurity(left_counts, static_cast<double>(n_left)) +
                 n_right * gini_impurity(right_counts, static_cast<double>(n_right))) /
                total;
            // Midpoint threshold; strict improvement keeps lowest feature index on ties.
            if (impurity < best.impurity - 1e-12) {
                best.found = true;
                best.feature = f;
                best.threshold = column[i].first + (column[i + 1].first - column[i].first) / 2.0f;
                best.impurity = impurity;
            }
        }
    }
    return best;
}

int majority_label(const LabeledDataset& data, const std::vector<std::size_t>& idx) {
    std::map<int, int> counts;
    for (std::size_t i : idx) counts[data.labels[i]] += 1;
    int best_label = counts.begin()->first;
    int best_count = counts.begin()->second;
    for (const auto& [label, count] : counts) {
        if (count > best_count) {
            best_label = label;
            best_count = count;
        }
    }
    return best_label;
}

int build_tree(TreeModel& model, const LabeledDataset& data, std::vector<std::size_t> idx,
               int depth) {
    std::map<int, int> counts;
    for (std::size_t i : idx) counts[data.labels[i]] += 1;
    const bool pure = counts.size() == 1;

    const int node_index = static_cast<int>(model.nodes.size());
    model.nodes.emplace_back();
    model.nodes[node_index].leaf_label = majority_label(data, idx);
    if (pure || depth >= model.max_depth ||
        idx.size() < 2 * static_cast<std::size_t>(model.min_leaf)) {
        return node_index;
    }
    const SplitChoice split = best_split(data, idx, model.min_leaf);
    const double parent_gini = gini_impurity(counts, static_cast<double>(idx.size()));
    if (!split.found || split.impurity >= parent_gini - 1e-12) {
        return node_index;  // no impurity improvement
    }
    std::vector<std::size_t> left_idx;
    std::vector<std::size_t> right_idx;
    for (std::size_t i : idx) {
        if (data.features[i][split.feature] <= split.threshold) {
            left_idx.push_back(i);
        } else {
            right_idx.push_back(i);
        }
    }
    idx.clear();
    idx.shrink_to_fit();
    const int left = build_tree(model, data, std::move(left_idx), depth + 1);
    const int right = build_tree(model, data, std::move(right_idx), depth + 1);
    model.nodes[node_index].feature = split.feature;
    model.nodes[node_index].threshold = split.threshold;
    model.nodes[node_index].left = left;
    model.nodes[node_index].right = right;
    return node_index;
}

}  // namespace

TreeModel tree_fit(const LabeledDataset& data, int max_depth, int min_leaf) {
    data.validate(1);
    if (max_depth < 1) throw data_error("tree_fit: max_depth must be >= 1");
    if (min_leaf < 1) throw data_error("tree_fit: min_leaf must be >= 1");
    TreeModel model;
    model.labels = data.label_set();
    model.max_depth = max_depth;
    model.min_leaf = min_leaf;
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), 0);
    build_tree(model, data, std::move(idx), 0);
    return model;
}

int tree_predict(const TreeModel& model, std::span<const float> x) {
    int node = 0;
    while (model.nodes[node].feature >= 0) {
        const TreeNode& n = model.nodes[node];
        if (static_cast<std::size_t>(n.feature) >= x.size()) {
            throw data_error("tree_predict: dimension mismatch");
        }
        node = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return model.nodes[node].leaf_label;
}

const char* classifier_kind_name(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::Svm: return "svm";
        case ClassifierKind::Lda: return "lda";
        case ClassifierKind::Knn: return "knn";
        case ClassifierKind::Tree: return "tree";
    }
    return "?";
}

ClassifierKind classifier_kind_from_name(const std::string& name) {
    if (name == "svm") return ClassifierKind::Svm;
    if (name == "lda") return ClassifierKind::Lda;
    if (name == "knn") return ClassifierKind::Knn;
    if (name == "tree") return ClassifierKind::Tree;
    throw data_error("unknown classifier '" + name + "' (expected svm|lda|knn|tree)");
}

ClassifierKind model_kind(const AnyModel& model) {
    return static_cast<ClassifierKind>(model.index());
}

int model_predict(const AnyModel& model, std::span<const float> x) {
    return std::visit(
        [&](const auto& m) -> int {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, SvmModel>) return svm_predict(m, x);
            if constexpr (std::is_same_v<T, LdaModel>) return lda_predict(m, x);
            if constexpr (std::is_same_v<T, KnnModel>) return knn_predict(m, x);
            if constexpr (std::is_same_v<T, TreeModel>) return tree_predict(m, x);
        },
        model);
}

}  // namespace emoscreen
