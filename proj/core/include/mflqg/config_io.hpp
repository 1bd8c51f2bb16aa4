#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mflqg/model.hpp"
#include "mflqg/riccati.hpp"

namespace mflqg {

// JSON configuration. Keys: n, m, T, steps, A, B, C, D, F, Ftilde, Q, R, G,
// Gamma, GammaBar, eta, etaBar, xi0. Matrices are row-major nested arrays,
// vectors flat arrays. Time-varying coefficients may be given as
// {"samples": [...]} with steps + 1 entries. Q, R and G are symmetrized on
// load; asymmetry above 1e-8 is reported through `warnings`.
ModelParams parse_config(const std::string& text, std::vector<std::string>* warnings = nullptr);
ModelParams load_config(const std::string& path, std::vector<std::string>* warnings = nullptr);

std::string dump_config(const ModelParams& params);
void save_config(const ModelParams& params, const std::string& path);

// Law artifact: the sampled trajectories of a solved decentralized law plus
// the mean field xhat, stored with the same {"samples": [...]} encoding.
struct LawArtifact {
  FeedbackLaw law;
  VecTrajectory xhat;
};
std::string dump_law(const FeedbackLaw& law, const VecTrajectory& xhat);
LawArtifact parse_law(const std::string& text);
LawArtifact load_law(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string& bytes);
std::string hex64(std::uint64_t value);

}  // namespace mflqg
