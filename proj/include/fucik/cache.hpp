#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "fucik/config.hpp"
#include "fucik/galerkin.hpp"
#include "fucik/linear_spectrum.hpp"
#include "fucik/mesh.hpp"

namespace fucik {

/// Environment variable that overrides the cache directory.
inline constexpr const char* kCacheEnv = "FUCIK_CACHE_DIR";

/// `override` if given, else $FUCIK_CACHE_DIR, else ./.fucik-cache.
std::filesystem::path cache_directory(const std::optional<std::string>& override = std::nullopt);

std::string hash_hex(std::uint64_t hash);

/// Mesh, forms and linear spectrum for a config, reusing cached binaries.
struct PreparedProblem {
    ProblemConfig config;
    Mesh mesh;
    GalerkinForms forms;
    EigenDecomposition decomp;
    std::uint64_t hash = 0;
    bool forms_cache_hit = false;
    bool eigen_cache_hit = false;
    std::filesystem::path forms_file;
    std::filesystem::path eigen_file;
    double assemble_seconds = 0.0;
    double eigen_seconds = 0.0;
};

/// Loads or assembles the forms; `with_eigen` also loads or computes the
/// eigendecomposition of (A, diag(m_lumped)).
PreparedProblem prepare_problem(const ProblemConfig& config, const std::filesystem::path& cache_dir,
                                bool with_eigen);

void write_forms_binary(const std::filesystem::path& path, const GalerkinForms& forms);
std::optional<GalerkinForms> read_forms_binary(const std::filesystem::path& path, int expected_size);

}  // namespace fucik
