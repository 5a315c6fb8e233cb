#include "mpdarcy/io.hpp"

#include "mpdarcy/error.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace mpdarcy {

namespace {

std::ofstream open_for_write(const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
    out << std::setprecision(17);
    return out;
}

}  // namespace

void write_vtk_structured_points(const std::string& path, const std::string& title,
                                 std::array<int, 3> cells, std::array<double, 3> origin,
                                 std::array<double, 3> spacing,
                                 const std::vector<VtkCellArray>& arrays)
{
    auto out = open_for_write(path);
    const long ncells = static_cast<long>(cells[0]) * cells[1] * cells[2];
    out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET STRUCTURED_POINTS\n";
    out << "DIMENSIONS " << cells[0] + 1 << ' ' << cells[1] + 1 << ' ' << cells[2] + 1 << '\n';
    out << "ORIGIN " << origin[0] << ' ' << origin[1] << ' ' << origin[2] << '\n';
    out << "SPACING " << spacing[0] << ' ' << spacing[1] << ' ' << spacing[2] << '\n';
    out << "CELL_DATA " << ncells << '\n';
    for (const auto& a : arrays) {
        if (static_cast<long>(a.values.size()) != ncells * a.components)
            throw Error(ErrorCode::inconsistent_inputs, "VTK array '" + a.name + "' has wrong size");
        if (a.components == 1) {
            out << "SCALARS " << a.name << " double 1\nLOOKUP_TABLE default\n";
        } else if (a.components == 3) {
            out << "VECTORS " << a.name << " double\n";
        } else {
            throw Error(ErrorCode::inconsistent_inputs, "VTK arrays must have 1 or 3 components");
        }
        for (long c = 0; c < ncells; ++c) {
            for (int d = 0; d < a.components; ++d)
                out << (d ? " " : "") << a.values[static_cast<std::size_t>(c * a.components + d)];
            out << '\n';
        }
    }
    if (!out)
        throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

void write_matrix_market(const std::string& path, const Eigen::SparseMatrix<double>& matrix)
{
    auto out = open_for_write(path);
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << matrix.rows() << ' ' << matrix.cols() << ' ' << matrix.nonZeros() << '\n';
    for (int col = 0; col < matrix.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(matrix, col); it; ++it)
            out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
    if (!out)
        throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string hex64(std::uint64_t value)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string read_text_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::io, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, std::string_view content)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error(ErrorCode::io, "cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out)
        throw Error(ErrorCode::io, "write failed for '" + path + "'");
}

std::string file_hash(const std::string& path)
{
    return hex64(fnv1a64(read_text_file(path)));
}

}  // namespace mpdarcy
