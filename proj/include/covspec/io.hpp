#pragma once

// On-disk formats. Everything numeric is written as %.17g so that a re-run
// with the same seed produces byte-identical files and a read-back loses
// nothing. Curves and histograms go to plain delimited text (any plotting
// tool can consume them); structured metadata goes to JSON sidecars named
// <data-file>.json; run manifests go to <data-file>.manifest.json.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "covspec/common.hpp"
#include "covspec/ensembles.hpp"
#include "covspec/panel.hpp"
#include "covspec/spectra.hpp"
#include "covspec/theory_density.hpp"
#include "covspec/theory_spacing.hpp"

namespace covspec {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    require(f.good(), "cannot open for writing: " + path);
    return f;
}

inline std::ifstream open_in(const std::string& path) {
    std::ifstream f(path);
    require(f.good(), "cannot open for reading: " + path);
    return f;
}

inline bool data_line(const std::string& line) {
    for (char ch : line)
        if (!std::isspace(static_cast<unsigned char>(ch))) return ch != '#';
    return false;
}

inline std::vector<double> parse_row(const std::string& line, const std::string& path) {
    std::vector<double> row;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        require(used == tok.size(), path + ": cannot parse number '" + tok + "'");
        row.push_back(v);
    }
    return row;
}

}  // namespace detail

inline void write_json(const std::string& path, const nlohmann::json& j) {
    auto f = detail::open_out(path);
    f << j.dump(2) << '\n';
}

inline nlohmann::json read_json(const std::string& path) {
    auto f = detail::open_in(path);
    nlohmann::json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error(path + ": invalid JSON: " + e.what());
    }
    return j;
}

// ---- flat real-valued samples: one value per line ----

inline void write_values(const std::string& path, const std::vector<double>& values) {
    auto f = detail::open_out(path);
    for (double v : values) f << fmt17(v) << '\n';
}

inline std::vector<double> read_values(const std::string& path) {
    auto f = detail::open_in(path);
    std::vector<double> out;
    std::string line;
    while (std::getline(f, line)) {
        if (!detail::data_line(line)) continue;
        const auto row = detail::parse_row(line, path);
        require(row.size() == 1, path + ": expected one value per line");
        out.push_back(row[0]);
    }
    require(!out.empty(), path + ": no values found");
    return out;
}

// ---- curves: "# kind=..." header, then x<TAB>y rows ----

inline void write_curve(const std::string& path, const TheoryCurve& curve) {
    auto f = detail::open_out(path);
    f << "# kind=" << to_string(curve.kind);
    for (const auto& [k, v] : curve.params) f << ' ' << k << '=' << fmt17(v);
    f << '\n';
    for (std::size_t i = 0; i < curve.xs.size(); ++i)
        f << fmt17(curve.xs[i]) << '\t' << fmt17(curve.ys[i]) << '\n';
}

// ---- histograms: left_edge<TAB>right_edge<TAB>height rows ----

inline void write_histogram(const std::string& path, const DensityHistogram& h) {
    auto f = detail::open_out(path);
    f << "# histogram total_count=" << h.total_count << '\n';
    for (std::size_t b = 0; b < h.bins(); ++b)
        f << fmt17(h.bin_edges[b]) << '\t' << fmt17(h.bin_edges[b + 1]) << '\t' << fmt17(h.heights[b])
          << '\n';
}

// ---- spectra ensembles: one spectrum per line (ascending), JSON sidecar ----

inline Provenance parse_provenance(const std::string& s) {
    if (s == "sampled-WL") return Provenance::SampledWL;
    if (s == "sampled-generalised") return Provenance::SampledGeneralized;
    if (s == "chopped-method1") return Provenance::ChoppedMethod1;
    if (s == "chopped-method2") return Provenance::ChoppedMethod2;
    throw std::runtime_error("unknown provenance tag: " + s);
}

inline void write_ensemble(const std::string& path, const SpectraEnsemble& ens) {
    require(!ens.spectra.empty(), "write_ensemble: empty ensemble");
    auto f = detail::open_out(path);
    for (const Spectrum& sp : ens.spectra) {
        for (std::size_t i = 0; i < sp.lambdas.size(); ++i)
            f << (i ? "\t" : "") << fmt17(sp.lambdas[i]);
        f << '\n';
    }
    write_json(path + ".json", nlohmann::json{{"schema", "spectra-ensemble"},
                                              {"n", ens.n()},
                                              {"t", ens.t()},
                                              {"count", ens.size()},
                                              {"provenance", to_string(ens.provenance)},
                                              {"seed", ens.seed}});
}

inline SpectraEnsemble read_ensemble(const std::string& path) {
    SpectraEnsemble ens;
    int t_window = 0;
    if (std::ifstream probe(path + ".json"); probe.good()) {
        const nlohmann::json j = read_json(path + ".json");
        t_window = j.value("t", 0);
        ens.seed = j.value("seed", std::uint64_t{0});
        if (j.contains("provenance")) ens.provenance = parse_provenance(j["provenance"]);
    }
    auto f = detail::open_in(path);
    std::string line;
    while (std::getline(f, line)) {
        if (!detail::data_line(line)) continue;
        const auto row = detail::parse_row(line, path);
        Spectrum sp;
        sp.lambdas = row;
        for (std::size_t i = 1; i < row.size(); ++i)
            require(row[i] >= row[i - 1], path + ": spectrum row not ascending");
        sp.n_assets = static_cast<int>(row.size());
        sp.t_window = t_window;
        sp.c_ratio = t_window > 0 ? static_cast<double>(sp.n_assets) / t_window : 0.0;
        sp.min_raw_lambda = row.empty() ? 0.0 : row.front();  // pre-clamp value not stored on disk
        require(ens.spectra.empty() || sp.lambdas.size() == ens.spectra.front().lambdas.size(),
                path + ": ragged ensemble (rows of different length)");
        ens.spectra.push_back(std::move(sp));
    }
    require(!ens.spectra.empty(), path + ": no spectra found");
    return ens;
}

// ---- return panels: header row of asset ids, then one row per time ----

inline void write_return_panel(const std::string& path, const ReturnPanel& rp) {
    require(rp.X.rows() >= 1 && rp.X.cols() >= 1, "write_return_panel: empty panel");
    auto f = detail::open_out(path);
    for (Eigen::Index j = 0; j < rp.X.cols(); ++j) {
        const auto idx = static_cast<std::size_t>(j);
        f << (j ? "\t" : "")
          << (idx < rp.asset_ids.size() ? rp.asset_ids[idx] : "col" + std::to_string(idx));
    }
    f << '\n';
    for (Eigen::Index i = 0; i < rp.X.rows(); ++i) {
        for (Eigen::Index j = 0; j < rp.X.cols(); ++j) f << (j ? "\t" : "") << fmt17(rp.X(i, j));
        f << '\n';
    }
    write_json(path + ".json", nlohmann::json{{"schema", "return-panel"},
                                              {"n_assets", rp.X.cols()},
                                              {"t_rows", rp.X.rows()}});
}

inline ReturnPanel read_return_panel(const std::string& path) {
    auto f = detail::open_in(path);
    ReturnPanel rp;
    std::string line;
    bool header_done = false;
    std::vector<std::vector<double>> rows;
    while (std::getline(f, line)) {
        if (!detail::data_line(line)) continue;
        if (!header_done) {
            std::istringstream ss(line);
            std::string tok;
            while (ss >> tok) rp.asset_ids.push_back(tok);
            require(!rp.asset_ids.empty(), path + ": empty header row");
            header_done = true;
            continue;
        }
        auto row = detail::parse_row(line, path);
        require(row.size() == rp.asset_ids.size(),
                path + ": row has " + std::to_string(row.size()) + " fields, header has " +
                    std::to_string(rp.asset_ids.size()));
        rows.push_back(std::move(row));
    }
    require(!rows.empty(), path + ": no data rows");
    rp.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rp.asset_ids.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            rp.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return rp;
}

// ---- spacing samples: one value per line, JSON sidecar with the kind ----

inline void write_spacing(const std::string& path, const SpacingSample& s) {
    write_values(path, s.values);
    nlohmann::json j{{"schema", "spacing-sample"},
                     {"kind", s.kind == SpacingKind::IndividualK ? "individual-k" : "global-unfolded"},
                     {"count", s.values.size()}};
    if (s.k_index) j["k"] = *s.k_index;
    write_json(path + ".json", j);
}

inline SpacingSample read_spacing(const std::string& path) {
    SpacingSample s;
    s.values = read_values(path);
    if (std::ifstream probe(path + ".json"); probe.good()) {
        const nlohmann::json j = read_json(path + ".json");
        const std::string kind = j.value("kind", "global-unfolded");
        s.kind = kind == "individual-k" ? SpacingKind::IndividualK : SpacingKind::GlobalUnfolded;
        if (j.contains("k")) s.k_index = j["k"].get<int>();
    }
    return s;
}

// ---- run manifests ----

struct RunManifest {
    std::string command;
    std::map<std::string, std::string> params;  // full effective parameter set
    std::uint64_t seed = 0;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    double wall_seconds = 0.0;

    nlohmann::json to_json() const {
        return {{"schema", "run-manifest"}, {"command", command},      {"params", params},
                {"seed", seed},             {"inputs", inputs},        {"outputs", outputs},
                {"tool_version", kVersion}, {"wall_seconds", wall_seconds}};
    }
};

// Written next to the primary output as <path>.manifest.json.
inline void write_manifest(const std::string& primary_output, const RunManifest& m) {
    write_json(primary_output + ".manifest.json", m.to_json());
}

}  // namespace covspec
