// ensemble_io.hpp
// Ensemble file format: one matrix per record as row-major interleaved
// real/imag doubles, plus a JSON sidecar header {d, K} at <path>.json.
// Binary doubles round-trip exactly; the sidecar carries the shape.

#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pqsi/qcore.hpp"

namespace pqsi {

inline std::string ensemble_sidecar_path(const std::string& path) { return path + ".json"; }

inline void save_ensemble(const StateEnsemble& ens, const std::string& path) {
    std::ofstream bin(path, std::ios::binary | std::ios::trunc);
    if (!bin) throw std::runtime_error("save_ensemble: cannot open '" + path + "'");
    const int d = ens.dim;
    for (const auto& state : ens.states) {
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                const Complex v = state.mat()(i, j);
                const double re = v.real();
                const double im = v.imag();
                bin.write(reinterpret_cast<const char*>(&re), sizeof(double));
                bin.write(reinterpret_cast<const char*>(&im), sizeof(double));
            }
        }
    }
    if (!bin) throw std::runtime_error("save_ensemble: write failed for '" + path + "'");

    nlohmann::json header;
    header["d"] = d;
    header["K"] = ens.k_arms();
    std::ofstream side(ensemble_sidecar_path(path), std::ios::trunc);
    if (!side) throw std::runtime_error("save_ensemble: cannot open sidecar for '" + path + "'");
    side << header.dump() << "\n";
}

inline StateEnsemble load_ensemble(const std::string& path) {
    std::ifstream side(ensemble_sidecar_path(path));
    if (!side)
        throw std::runtime_error("load_ensemble: missing sidecar '" + ensemble_sidecar_path(path) + "'");
    nlohmann::json header;
    side >> header;
    if (!header.contains("d") || !header.contains("K"))
        throw std::runtime_error("load_ensemble: sidecar must contain fields 'd' and 'K'");
    const int d = header["d"].get<int>();
    const int k = header["K"].get<int>();
    if (d < 2 || k < 2) throw std::runtime_error("load_ensemble: sidecar requires d >= 2 and K >= 2");

    std::ifstream bin(path, std::ios::binary);
    if (!bin) throw std::runtime_error("load_ensemble: cannot open '" + path + "'");
    std::vector<DensityMatrix> states;
    states.reserve(k);
    for (int s = 0; s < k; ++s) {
        CMatrix mat(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                double re = 0, im = 0;
                bin.read(reinterpret_cast<char*>(&re), sizeof(double));
                bin.read(reinterpret_cast<char*>(&im), sizeof(double));
                if (!bin) throw std::runtime_error("load_ensemble: truncated record in '" + path + "'");
                mat(i, j) = Complex(re, im);
            }
        }
        states.emplace_back(std::move(mat));
    }
    return make_ensemble(std::move(states));
}

}  // namespace pqsi
