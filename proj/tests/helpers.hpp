#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <geodecomp/cli.hpp>
#include <geodecomp/matrix.hpp>

namespace helpers {

inline geodecomp::Rational rand_rational(std::mt19937_64& rng, unsigned num_range = 9,
                                         unsigned den_range = 4) {
    long num = static_cast<long>(rng() % (2 * num_range + 1)) - static_cast<long>(num_range);
    long den = 1 + static_cast<long>(rng() % den_range);
    return geodecomp::Rational(num, den);
}

inline geodecomp::RatMatrix rand_matrix(std::mt19937_64& rng, std::size_t rows,
                                        std::size_t cols) {
    geodecomp::RatMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rand_rational(rng);
    return m;
}

inline std::string write_temp(const std::string& name, const std::string& content) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    out.close();
    return path.string();
}

inline const char* square_mesh_json() {
    return "{\"vertices\": 4, \"cells\": [[0, 1, 2], [0, 2, 3]]}";
}

struct CliRun {
    int code = 0;
    std::string out;
    std::string err;
};

inline CliRun run_cli(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code = geodecomp::cli::run_command(args, out, err);
    return CliRun{code, out.str(), err.str()};
}

} // namespace helpers
