#include "polywidth/snapshots.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <string>

#include "polywidth/binary_io.hpp"

namespace polywidth {

SnapshotSet::SnapshotSet(Matrix states, Weight weight, std::vector<double> labels)
    : states_(std::move(states)), weight_(std::move(weight)), labels_(std::move(labels))
{
    if (states_.cols() < 1 || states_.rows() < 1)
        throw ContractViolation("SnapshotSet: need at least one state of positive dimension");
    if (!states_.allFinite())
        throw ContractViolation("SnapshotSet: states must be finite");
    if (!weight_.is_uniform() && weight_.diagonal_entries().size() != states_.rows())
        throw ContractViolation("SnapshotSet: diagonal weight length must equal N");
    if (!labels_.empty() && static_cast<Index>(labels_.size()) != states_.cols())
        throw ContractViolation("SnapshotSet: one label per snapshot");
}

double SnapshotSet::max_norm() const
{
    double best = 0;
    for (Index j = 0; j < count(); ++j)
        best = std::max(best, norm(j));
    return best;
}

void write_snapshots(std::ostream &out, const SnapshotSet &s)
{
    detail::write_magic(out, "PWSS");
    detail::write_le<std::uint32_t>(out, kSnapshotFormatVersion);
    detail::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(s.ambient_dim()));
    detail::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(s.count()));
    const Weight &w = s.weight();
    detail::write_le<std::uint8_t>(out, w.is_uniform() ? 0 : 1);
    if (w.is_uniform()) {
        detail::write_le<double>(out, w.uniform_value());
    } else {
        for (Index i = 0; i < s.ambient_dim(); ++i)
            detail::write_le<double>(out, w.diagonal_entries()[i]);
    }
    const Matrix &states = s.states();
    for (Index j = 0; j < states.cols(); ++j)
        for (Index i = 0; i < states.rows(); ++i)
            detail::write_le<double>(out, states(i, j));
}

SnapshotSet read_snapshots(std::istream &in)
{
    detail::expect_magic(in, "PWSS");
    const auto version = detail::read_le<std::uint32_t>(in);
    if (version != kSnapshotFormatVersion)
        throw IoError("unsupported snapshot format version " + std::to_string(version));
    const auto rows = detail::read_le<std::uint64_t>(in);
    const auto cols = detail::read_le<std::uint64_t>(in);
    const auto kind = detail::read_le<std::uint8_t>(in);
    if (rows == 0 || cols == 0 || rows > (1ull << 32) || cols > (1ull << 32))
        throw IoError("snapshot header has implausible dimensions");

    Weight weight;
    if (kind == 0) {
        weight = Weight::uniform(detail::read_le<double>(in));
    } else if (kind == 1) {
        Vector diag(static_cast<Index>(rows));
        for (Index i = 0; i < diag.size(); ++i)
            diag[i] = detail::read_le<double>(in);
        weight = Weight::diagonal(std::move(diag));
    } else {
        throw IoError("unknown weight kind " + std::to_string(kind));
    }

    Matrix states(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index j = 0; j < states.cols(); ++j)
        for (Index i = 0; i < states.rows(); ++i)
            states(i, j) = detail::read_le<double>(in);
    return {std::move(states), std::move(weight)};
}

void save_snapshots(const std::filesystem::path &path, const SnapshotSet &s)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    write_snapshots(out, s);
}

SnapshotSet load_snapshots(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    return read_snapshots(in);
}

namespace {

std::vector<std::string> split_csv_line(const std::string &line)
{
    std::vector<std::string> fields;
    std::stringstream stream(line);
    std::string field;
    while (std::getline(stream, field, ','))
        fields.push_back(field);
    if (!line.empty() && line.back() == ',')
        fields.emplace_back();
    return fields;
}

double parse_double(const std::string &text)
{
    std::size_t used = 0;
    double value = 0;
    try {
        value = std::stod(text, &used);
    } catch (const std::exception &) {
        throw IoError("not a number: '" + text + "'");
    }
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used])))
        ++used;
    if (used != text.size())
        throw IoError("not a number: '" + text + "'");
    return value;
}

} // namespace

SnapshotSet read_snapshots_csv(std::istream &in, const Weight &weight)
{
    std::string line;
    if (!std::getline(in, line))
        throw IoError("empty snapshot CSV");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    std::vector<double> labels;
    for (const auto &field : split_csv_line(line))
        labels.push_back(parse_double(field));
    const auto cols = static_cast<Index>(labels.size());

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto fields = split_csv_line(line);
        if (static_cast<Index>(fields.size()) != cols)
            throw IoError("snapshot CSV row has " + std::to_string(fields.size()) + " fields, expected " +
                          std::to_string(cols));
        std::vector<double> row;
        row.reserve(fields.size());
        for (const auto &field : fields)
            row.push_back(parse_double(field));
        rows.push_back(std::move(row));
    }
    if (rows.empty())
        throw IoError("snapshot CSV has no data rows");

    Matrix states(static_cast<Index>(rows.size()), cols);
    for (Index i = 0; i < states.rows(); ++i)
        for (Index j = 0; j < cols; ++j)
            states(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return {std::move(states), weight, std::move(labels)};
}

SnapshotSet load_snapshots_csv(const std::filesystem::path &path, const Weight &weight)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    return read_snapshots_csv(in, weight);
}

} // namespace polywidth
