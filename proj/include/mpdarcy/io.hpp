#pragma once

#include <Eigen/SparseCore>

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mpdarcy {

struct VtkCellArray {
    std::string name;
    int components = 1;
    std::vector<double> values;  ///< components * cells, component-fastest
};

/// Legacy VTK STRUCTURED_POINTS (ASCII) with cell data.
/// `cells` holds the cell counts; the file stores cells + 1 points per axis.
void write_vtk_structured_points(const std::string& path, const std::string& title,
                                 std::array<int, 3> cells, std::array<double, 3> origin,
                                 std::array<double, 3> spacing,
                                 const std::vector<VtkCellArray>& arrays);

/// MatrixMarket coordinate real general format.
void write_matrix_market(const std::string& path, const Eigen::SparseMatrix<double>& matrix);

/// 64-bit FNV-1a over raw bytes; rendered as 16 lowercase hex digits.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);
std::string file_hash(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace mpdarcy
