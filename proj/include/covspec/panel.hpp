#pragma once

// Price-panel ingestion: delimited text -> positive complete price matrix ->
// log returns -> column-normalized return panel. Assets with any missing or
// nonpositive quote are dropped (survivorship filter), never imputed.
// Normalization uses the population divisor (variance over T, not T-1) so a
// covariance built from the panel has an exactly unit diagonal.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "covspec/common.hpp"

namespace covspec {

struct PricePanel {
    Eigen::MatrixXd prices;                // T_raw x N, strictly positive, complete
    std::vector<std::string> asset_ids;    // surviving assets
    std::vector<std::string> timestamps;   // strictly increasing labels
    std::string delta_t = "1 step";        // opaque sampling-step label
    std::vector<std::string> dropped_assets;
};

struct ReturnPanel {
    Eigen::MatrixXd X;                     // T x N normalized returns
    std::vector<std::string> asset_ids;
    Eigen::VectorXd per_asset_mean;        // <G_i> before normalization
    Eigen::VectorXd per_asset_sigma;       // population sigma_i
};

struct LoadOptions {
    char delimiter = '\0';                 // '\0' = auto-detect comma/tab/semicolon
    bool drop_incomplete = true;           // off: incomplete assets are an error
};

namespace detail {

inline bool is_missing_token(std::string tok) {
    for (auto& ch : tok) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    return tok.empty() || tok == "na" || tok == "nan" || tok == "null" || tok == "none" || tok == "-";
}

inline std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == delim) {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    for (auto& tok : out) {
        std::size_t a = tok.find_first_not_of(" \t");
        std::size_t b = tok.find_last_not_of(" \t");
        tok = (a == std::string::npos) ? std::string() : tok.substr(a, b - a + 1);
    }
    return out;
}

inline char detect_delimiter(const std::string& header) {
    for (char cand : {'\t', ',', ';'})
        if (header.find(cand) != std::string::npos) return cand;
    return ',';
}

// Timestamps compare numerically when every label parses as a number,
// lexicographically otherwise (ISO dates order correctly either way).
inline bool timestamps_increasing(const std::vector<std::string>& ts) {
    std::vector<double> nums(ts.size());
    bool numeric = true;
    for (std::size_t i = 0; i < ts.size() && numeric; ++i) {
        try {
            std::size_t pos = 0;
            nums[i] = std::stod(ts[i], &pos);
            numeric = pos == ts[i].size();
        } catch (...) {
            numeric = false;
        }
    }
    for (std::size_t i = 1; i < ts.size(); ++i) {
        bool ok = numeric ? nums[i] > nums[i - 1] : ts[i] > ts[i - 1];
        if (!ok) return false;
    }
    return true;
}

}  // namespace detail

inline PricePanel load_price_panel(const std::string& path, const LoadOptions& opt = {}) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_price_panel: cannot open '" + path + "'");
    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("load_price_panel: zero surviving assets (empty file)");
    const char delim = opt.delimiter ? opt.delimiter : detail::detect_delimiter(header);
    std::vector<std::string> head = detail::split_line(header, delim);
    if (head.size() < 2) throw std::runtime_error("load_price_panel: header lacks asset columns");
    const std::size_t n_raw = head.size() - 1;

    std::vector<std::string> timestamps;
    std::vector<std::vector<double>> cols(n_raw);   // NaN marks missing
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> toks = detail::split_line(line, delim);
        if (toks.size() != head.size())
            throw std::runtime_error("load_price_panel: row " + std::to_string(lineno) + " has " +
                                     std::to_string(toks.size()) + " fields, expected " +
                                     std::to_string(head.size()));
        timestamps.push_back(toks[0]);
        for (std::size_t j = 0; j < n_raw; ++j) {
            double v = std::numeric_limits<double>::quiet_NaN();
            if (!detail::is_missing_token(toks[j + 1])) {
                std::size_t used = 0;
                try {
                    v = std::stod(toks[j + 1], &used);
                } catch (...) {
                    used = 0;
                }
                if (used != toks[j + 1].size())  // reject trailing garbage, e.g. "12x"
                    throw std::runtime_error("load_price_panel: bad number '" + toks[j + 1] +
                                             "' at row " + std::to_string(lineno));
            }
            cols[j].push_back(v);
        }
    }
    if (timestamps.empty()) throw std::runtime_error("load_price_panel: zero surviving assets (no data rows)");
    if (!detail::timestamps_increasing(timestamps))
        throw std::runtime_error("load_price_panel: timestamps not strictly increasing");

    PricePanel panel;
    panel.timestamps = std::move(timestamps);
    std::vector<std::size_t> keep;
    for (std::size_t j = 0; j < n_raw; ++j) {
        bool complete = true;
        for (double v : cols[j])
            if (std::isnan(v) || v <= 0.0) {
                complete = false;
                break;
            }
        if (complete) {
            keep.push_back(j);
        } else if (opt.drop_incomplete) {
            panel.dropped_assets.push_back(head[j + 1]);
        } else {
            throw std::runtime_error("load_price_panel: asset '" + head[j + 1] +
                                     "' has missing or nonpositive prices");
        }
    }
    if (keep.empty()) throw std::runtime_error("load_price_panel: zero surviving assets");
    panel.prices.resize(static_cast<Eigen::Index>(panel.timestamps.size()),
                        static_cast<Eigen::Index>(keep.size()));
    for (std::size_t jj = 0; jj < keep.size(); ++jj) {
        panel.asset_ids.push_back(head[keep[jj] + 1]);
        for (std::size_t i = 0; i < panel.timestamps.size(); ++i)
            panel.prices(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(jj)) = cols[keep[jj]][i];
    }
    return panel;
}

// G_i(t) = log S_i(t+dt) - log S_i(t); one fewer row than the price panel.
inline Eigen::MatrixXd compute_log_returns(const PricePanel& p) {
    require(p.prices.rows() >= 2, "compute_log_returns: need at least two price rows");
    if ((p.prices.array() <= 0.0).any())
        throw std::runtime_error("compute_log_returns: nonpositive price survived filtering");
    const Eigen::Index t = p.prices.rows() - 1, n = p.prices.cols();
    Eigen::MatrixXd g(t, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < t; ++i)
            g(i, j) = std::log(p.prices(i + 1, j)) - std::log(p.prices(i, j));
    return g;
}

// Column-wise (x - mean)/sigma with population sigma. Zero-variance columns are
// an error: a constant return series carries no spectral information.
inline ReturnPanel normalize_returns(const Eigen::MatrixXd& g,
                                     std::vector<std::string> asset_ids = {}) {
    require(g.rows() >= 2 && g.cols() >= 1, "normalize_returns: need a T>=2 by N>=1 matrix");
    const Eigen::Index t = g.rows(), n = g.cols();
    if (asset_ids.empty())
        for (Eigen::Index j = 0; j < n; ++j) asset_ids.push_back("col" + std::to_string(j));
    require(static_cast<Eigen::Index>(asset_ids.size()) == n,
            "normalize_returns: asset id count does not match column count");
    ReturnPanel rp;
    rp.X.resize(t, n);
    rp.per_asset_mean.resize(n);
    rp.per_asset_sigma.resize(n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double mean = g.col(j).mean();
        const double var = (g.col(j).array() - mean).square().sum() / static_cast<double>(t);
        if (!(var > 0.0))
            throw std::runtime_error("normalize_returns: zero variance in asset '" + asset_ids[j] + "'");
        const double sigma = std::sqrt(var);
        rp.per_asset_mean(j) = mean;
        rp.per_asset_sigma(j) = sigma;
        rp.X.col(j) = (g.col(j).array() - mean) / sigma;
    }
    rp.asset_ids = std::move(asset_ids);
    return rp;
}

inline ReturnPanel ingest(const std::string& path, const LoadOptions& opt = {}) {
    PricePanel p = load_price_panel(path, opt);
    return normalize_returns(compute_log_returns(p), p.asset_ids);
}

}  // namespace covspec
