// Isolation forest: random axis-aligned partition trees whose average
// isolation depth scores how anomalous a point is.
//
//   s(x, psi) = 2^(-E[h(x)] / c(psi))
//   c(n) = 2 H(n-1) - 2 (n-1) / n,  H(i) ~ ln(i) + Euler gamma,  c(2) = 1
//
// Inputs are z-scored with training-set statistics before both tree
// construction and scoring.
#pragma once

#include "gpsdefense/core.hpp"
#include "gpsdefense/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

namespace gpsdefense {

/// Average path length of an unsuccessful BST search over n points.
inline double average_path_length(double n) {
    if (n <= 1.0) return 0.0;
    if (n == 2.0) return 1.0;
    return 2.0 * (std::log(n - 1.0) + std::numbers::egamma) - 2.0 * (n - 1.0) / n;
}

inline double anomaly_score(double mean_depth, double psi) {
    return std::exp2(-mean_depth / average_path_length(psi));
}

/// Linear-interpolation quantile (numpy's default) of unsorted data.
inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) throw InvalidInput("quantile: empty data");
    std::sort(v.begin(), v.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

class IsolationTree {
public:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double split = 0.0;
        int left = -1;
        int right = -1;
        int size = 0;  // training points reaching this node
    };

    /// Grow on `rows` (indices into `data`, each point `dim` wide).
    static IsolationTree grow(std::span<const double> data, std::size_t dim,
                              std::vector<std::size_t> rows, int height_limit, Rng& rng) {
        IsolationTree t;
        t.dim_ = dim;
        t.build(data, rows, 0, height_limit, rng);
        return t;
    }

    /// Depth of x's leaf plus c(leaf size) for the unresolved remainder.
    double path_length(std::span<const double> x) const {
        int n = 0;
        double depth = 0.0;
        while (nodes_[static_cast<std::size_t>(n)].feature >= 0) {
            const Node& nd = nodes_[static_cast<std::size_t>(n)];
            n = x[static_cast<std::size_t>(nd.feature)] < nd.split ? nd.left : nd.right;
            depth += 1.0;
        }
        return depth + average_path_length(nodes_[static_cast<std::size_t>(n)].size);
    }

    const std::vector<Node>& nodes() const { return nodes_; }
    std::size_t dim() const { return dim_; }

    static IsolationTree from_nodes(std::vector<Node> nodes, std::size_t dim) {
        IsolationTree t;
        t.nodes_ = std::move(nodes);
        t.dim_ = dim;
        return t;
    }

private:
    int build(std::span<const double> data, std::vector<std::size_t>& rows, int depth,
              int height_limit, Rng& rng) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back({});
        nodes_.back().size = static_cast<int>(rows.size());
        if (depth >= height_limit || rows.size() <= 1) return id;

        // Features that still vary inside this node.
        std::vector<int> candidates;
        std::vector<double> lo(dim_), hi(dim_);
        for (std::size_t f = 0; f < dim_; ++f) {
            lo[f] = hi[f] = data[rows[0] * dim_ + f];
            for (std::size_t r : rows) {
                const double v = data[r * dim_ + f];
                lo[f] = std::min(lo[f], v);
                hi[f] = std::max(hi[f], v);
            }
            if (hi[f] > lo[f]) candidates.push_back(static_cast<int>(f));
        }
        if (candidates.empty()) return id;

        const int f = candidates[rng.index(0, candidates.size() - 1)];
        const auto fu = static_cast<std::size_t>(f);
        double split = rng.uniform(lo[fu], hi[fu]);
        if (!(split > lo[fu])) split = std::nextafter(lo[fu], hi[fu]);

        std::vector<std::size_t> left, right;
        for (std::size_t r : rows) (data[r * dim_ + fu] < split ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();

        const int l = build(data, left, depth + 1, height_limit, rng);
        const int rgt = build(data, right, depth + 1, height_limit, rng);
        Node& nd = nodes_[static_cast<std::size_t>(id)];
        nd.feature = f;
        nd.split = split;
        nd.left = l;
        nd.right = rgt;
        return id;
    }

    std::vector<Node> nodes_;
    std::size_t dim_ = 0;
};

struct ForestParams {
    std::size_t trees = 100;
    std::size_t max_samples = 256;  // psi = min(max_samples, |train|)
    double contamination = 0.2;     // alpha
    std::size_t window = 3;         // W
    std::uint64_t seed = 1;
    unsigned workers = 0;           // 0 = hardware concurrency
};

class IsolationForest {
public:
    static constexpr int format_version = 1;

    /// `samples` is row-major, each row `dim` wide.
    static IsolationForest train(std::span<const double> samples, std::size_t dim,
                                 const ForestParams& params) {
        if (dim == 0) throw InvalidInput("iforest: zero-dimensional samples");
        if (samples.size() % dim != 0) throw InvalidInput("iforest: ragged sample matrix");
        const std::size_t n = samples.size() / dim;
        if (params.trees < 1) throw InvalidInput("iforest: need at least one tree");
        if (!(params.contamination > 0.0 && params.contamination < 1.0))
            throw InvalidInput("iforest: contamination must lie in (0, 1)");
        const std::size_t psi = std::min(params.max_samples, n);
        if (psi < 2 || n < 2) throw InvalidInput("iforest: need at least 2 training samples");

        IsolationForest f;
        f.dim_ = dim;
        f.psi_ = psi;
        f.window_ = params.window;
        f.alpha_ = params.contamination;
        f.mean_.assign(dim, 0.0);
        f.scale_.assign(dim, 1.0);
        for (std::size_t d = 0; d < dim; ++d) {
            double sum = 0.0, sq = 0.0;
            for (std::size_t i = 0; i < n; ++i) sum += samples[i * dim + d];
            const double mu = sum / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) sq += std::pow(samples[i * dim + d] - mu, 2);
            const double sd = std::sqrt(sq / static_cast<double>(n));
            f.mean_[d] = mu;
            f.scale_[d] = sd > 1e-12 ? sd : 1.0;
        }
        std::vector<double> z(samples.size());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t d = 0; d < dim; ++d)
                z[i * dim + d] = (samples[i * dim + d] - f.mean_[d]) / f.scale_[d];

        const int height = static_cast<int>(std::ceil(std::log2(static_cast<double>(psi))));
        f.trees_.resize(params.trees);
        auto grow_range = [&](std::size_t begin, std::size_t end) {
            for (std::size_t t = begin; t < end; ++t) {
                Rng rng(params.seed, Stream::forest, t);
                std::vector<std::size_t> all(n);
                std::iota(all.begin(), all.end(), std::size_t{0});
                // Partial Fisher-Yates: first psi entries become the subsample.
                for (std::size_t i = 0; i < psi; ++i) std::swap(all[i], all[rng.index(i, n - 1)]);
                all.resize(psi);
                f.trees_[t] = IsolationTree::grow(z, dim, std::move(all), height, rng);
            }
        };
        unsigned workers = params.workers ? params.workers : std::thread::hardware_concurrency();
        workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(params.trees)));
        if (workers == 1) {
            grow_range(0, params.trees);
        } else {
            std::vector<std::jthread> pool;
            const std::size_t chunk = (params.trees + workers - 1) / workers;
            for (std::size_t b = 0; b < params.trees; b += chunk)
                pool.emplace_back(grow_range, b, std::min(params.trees, b + chunk));
        }

        std::vector<double> scores(n);
        for (std::size_t i = 0; i < n; ++i) scores[i] = f.score(samples.subspan(i * dim, dim));
        f.threshold_ = quantile(scores, 1.0 - params.contamination);
        return f;
    }

    /// Anomaly score in (0, 1).
    double score(std::span<const double> x) const {
        if (x.size() != dim_)
            throw InvalidInput("iforest: expected " + std::to_string(dim_) + " features, got " +
                               std::to_string(x.size()));
        std::vector<double> z(dim_);
        for (std::size_t d = 0; d < dim_; ++d) z[d] = (x[d] - mean_[d]) / scale_[d];
        double total = 0.0;
        for (const auto& t : trees_) total += t.path_length(z);
        return anomaly_score(total / static_cast<double>(trees_.size()),
                             static_cast<double>(psi_));
    }

    bool is_anomaly(double s) const { return s > threshold_; }

    /// Rebuild the cutoff for another contamination level from training scores.
    void set_threshold(double t) { threshold_ = t; }

    std::size_t dim() const { return dim_; }
    std::size_t psi() const { return psi_; }
    std::size_t window() const { return window_; }
    double threshold() const { return threshold_; }
    double contamination() const { return alpha_; }
    double normalizer() const { return average_path_length(static_cast<double>(psi_)); }
    const std::vector<IsolationTree>& trees() const { return trees_; }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["format"] = "gpsdefense-iforest";
        j["version"] = format_version;
        j["dim"] = dim_;
        j["psi"] = psi_;
        j["window"] = window_;
        j["contamination"] = alpha_;
        j["threshold"] = threshold_;
        j["mean"] = mean_;
        j["scale"] = scale_;
        auto& trees = j["trees"] = nlohmann::json::array();
        for (const auto& t : trees_) {
            nlohmann::json tj;
            std::vector<int> feature, left, right, size;
            std::vector<double> split;
            for (const auto& nd : t.nodes()) {
                feature.push_back(nd.feature);
                split.push_back(nd.split);
                left.push_back(nd.left);
                right.push_back(nd.right);
                size.push_back(nd.size);
            }
            tj["feature"] = feature;
            tj["split"] = split;
            tj["left"] = left;
            tj["right"] = right;
            tj["size"] = size;
            trees.push_back(std::move(tj));
        }
        return j;
    }

    static IsolationForest from_json(const nlohmann::json& j) {
        if (j.value("format", "") != "gpsdefense-iforest")
            throw InvalidInput("iforest model: unrecognized format");
        if (j.value("version", 0) != format_version)
            throw InvalidInput("iforest model: unsupported version");
        IsolationForest f;
        f.dim_ = j.at("dim").get<std::size_t>();
        f.psi_ = j.at("psi").get<std::size_t>();
        f.window_ = j.at("window").get<std::size_t>();
        f.alpha_ = j.at("contamination").get<double>();
        f.threshold_ = j.at("threshold").get<double>();
        f.mean_ = j.at("mean").get<std::vector<double>>();
        f.scale_ = j.at("scale").get<std::vector<double>>();
        if (f.mean_.size() != f.dim_ || f.scale_.size() != f.dim_)
            throw InvalidInput("iforest model: standardization size mismatch");
        for (const auto& tj : j.at("trees")) {
            const auto feature = tj.at("feature").get<std::vector<int>>();
            const auto split = tj.at("split").get<std::vector<double>>();
            const auto left = tj.at("left").get<std::vector<int>>();
            const auto right = tj.at("right").get<std::vector<int>>();
            const auto size = tj.at("size").get<std::vector<int>>();
            const std::size_t m = feature.size();
            if (split.size() != m || left.size() != m || right.size() != m || size.size() != m || m == 0)
                throw InvalidInput("iforest model: malformed tree");
            std::vector<IsolationTree::Node> nodes(m);
            for (std::size_t i = 0; i < m; ++i) {
                nodes[i] = {feature[i], split[i], left[i], right[i], size[i]};
                const bool leaf = feature[i] < 0;
                const auto in_range = [m](int c) { return c > 0 && static_cast<std::size_t>(c) < m; };
                if (!leaf && (static_cast<std::size_t>(feature[i]) >= f.dim_ || !in_range(left[i]) ||
                              !in_range(right[i])))
                    throw InvalidInput("iforest model: malformed tree");
            }
            f.trees_.push_back(IsolationTree::from_nodes(std::move(nodes), f.dim_));
        }
        if (f.trees_.empty()) throw InvalidInput("iforest model: no trees");
        return f;
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw InvalidInput("cannot write model file " + path);
        out << to_json().dump() << '\n';
    }

    static IsolationForest load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw InvalidInput("cannot open model file " + path);
        try {
            return from_json(nlohmann::json::parse(in));
        } catch (const nlohmann::json::exception& e) {
            throw InvalidInput("model file " + path + ": " + e.what());
        }
    }

private:
    std::vector<IsolationTree> trees_;
    std::vector<double> mean_, scale_;
    std::size_t dim_ = 0;
    std::size_t psi_ = 0;
    std::size_t window_ = 1;
    double alpha_ = 0.2;
    double threshold_ = 0.5;
};

}  // namespace gpsdefense
