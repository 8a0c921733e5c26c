#pragma once

#include "ampsdp/amp.hpp"
#include "ampsdp/ensembles.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>

namespace ampsdp {

std::string read_text(const std::string& path);
// Writes through a temporary file and renames, so readers never see a partial file.
void write_text(const std::string& path, const std::string& text);

// Moment matrices in the symmat text format (upper triangle).
void save_moments(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd load_moments(const std::string& path);

std::string to_json(const amp_trace& tr);
amp_trace trace_from_json(const std::string& text);

std::string vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const std::string& text);

std::string to_json(const state_evolution_table& se);

// FNV-1a, stable across platforms and runs.
std::uint64_t stable_hash(const std::string& s);
std::string hex64(std::uint64_t x);

}  // namespace ampsdp
