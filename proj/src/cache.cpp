#include "fucik/cache.hpp"

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "fucik/errors.hpp"

namespace fucik {

namespace {

constexpr char kFormsMagic[8] = {'F', 'U', 'C', 'F', 'O', 'R', 'M', '1'};
constexpr char kEigenMagic[8] = {'F', 'U', 'C', 'E', 'I', 'G', 'N', '1'};

void write_block(std::ofstream& out, const double* data, std::size_t count) {
    out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
}

bool read_block(std::ifstream& in, double* data, std::size_t count) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
    return static_cast<bool>(in);
}

// Write to a temporary sibling and rename, so readers never see partial files.
template <class Writer>
void atomic_write(const std::filesystem::path& path, Writer&& writer) {
    std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write cache file " + tmp);
        writer(out);
        if (!out) throw std::runtime_error("failed writing cache file " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

bool read_header(std::ifstream& in, const char (&magic)[8], std::uint64_t& n) {
    char buf[8];
    in.read(buf, 8);
    if (!in || std::memcmp(buf, magic, 8) != 0) return false;
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    return static_cast<bool>(in);
}

void write_eigen_binary(const std::filesystem::path& path, const Vector& values, const Matrix& vectors) {
    atomic_write(path, [&](std::ofstream& out) {
        const std::uint64_t n = values.size();
        out.write(kEigenMagic, 8);
        out.write(reinterpret_cast<const char*>(&n), sizeof(n));
        write_block(out, values.data(), n);
        write_block(out, vectors.data(), n * n);
    });
}

std::optional<std::pair<Vector, Matrix>> read_eigen_binary(const std::filesystem::path& path, int expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::uint64_t n = 0;
    if (!read_header(in, kEigenMagic, n) || n != static_cast<std::uint64_t>(expected)) return std::nullopt;
    Vector values(expected);
    Matrix vectors(expected, expected);
    if (!read_block(in, values.data(), n) || !read_block(in, vectors.data(), n * n)) return std::nullopt;
    return std::make_pair(std::move(values), std::move(vectors));
}

}  // namespace

std::filesystem::path cache_directory(const std::optional<std::string>& override) {
    if (override && !override->empty()) return *override;
    if (const char* env = std::getenv(kCacheEnv); env && *env) return env;
    return std::filesystem::current_path() / ".fucik-cache";
}

std::string hash_hex(std::uint64_t hash) {
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << hash;
    return os.str();
}

void write_forms_binary(const std::filesystem::path& path, const GalerkinForms& forms) {
    atomic_write(path, [&](std::ofstream& out) {
        const std::uint64_t n = forms.size();
        out.write(kFormsMagic, 8);
        out.write(reinterpret_cast<const char*>(&n), sizeof(n));
        write_block(out, forms.A.data(), n * n);
        write_block(out, forms.M.data(), n * n);
        write_block(out, forms.m_lumped.data(), n);
    });
}

std::optional<GalerkinForms> read_forms_binary(const std::filesystem::path& path, int expected_size) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::uint64_t n = 0;
    if (!read_header(in, kFormsMagic, n) || n != static_cast<std::uint64_t>(expected_size)) return std::nullopt;
    GalerkinForms forms;
    forms.A.resize(expected_size, expected_size);
    forms.M.resize(expected_size, expected_size);
    forms.m_lumped.resize(expected_size);
    if (!read_block(in, forms.A.data(), n * n) || !read_block(in, forms.M.data(), n * n) ||
        !read_block(in, forms.m_lumped.data(), n))
        return std::nullopt;
    return forms;
}

PreparedProblem prepare_problem(const ProblemConfig& config, const std::filesystem::path& cache_dir,
                                bool with_eigen) {
    using Clock = std::chrono::steady_clock;
    PreparedProblem out;
    out.config = config;
    out.mesh = build_mesh(config);
    out.hash = forms_hash(config);
    const std::string stem = hash_hex(out.hash);
    out.forms_file = cache_dir / (stem + ".forms.bin");
    out.eigen_file = cache_dir / (stem + ".eigen.bin");
    const int n = out.mesh.num_dofs();

    auto t0 = Clock::now();
    if (auto cached = read_forms_binary(out.forms_file, n)) {
        out.forms = std::move(*cached);
        out.forms_cache_hit = true;
    } else {
        out.forms = assemble_forms(out.mesh, config);
        write_forms_binary(out.forms_file, out.forms);
    }
    out.assemble_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (!with_eigen) return out;

    t0 = Clock::now();
    const Matrix D = out.forms.lumped_mass_matrix();
    // Raw solver output is cached, so fresh and cached runs share the same
    // post-processing and produce bitwise-identical decompositions.
    auto raw = read_eigen_binary(out.eigen_file, n);
    out.eigen_cache_hit = raw.has_value();
    if (!raw) {
        Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(out.forms.A, D,
                                                                Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
        if (solver.info() != Eigen::Success) throw SolverError("generalized eigensolver failed");
        raw.emplace(solver.eigenvalues(), solver.eigenvectors());
        write_eigen_binary(out.eigen_file, raw->first, raw->second);
    }
    out.decomp = cluster_eigenpairs(std::move(raw->first), std::move(raw->second), out.forms.A, D,
                                    config.tolerances.cluster_tol);
    out.eigen_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return out;
}

}  // namespace fucik
