#include "polywidth/decoder_io.hpp"

#include <fstream>

#include <json.hpp>

#include "polywidth/binary_io.hpp"

namespace polywidth {

void write_decoder(std::ostream &out, const PolynomialDecoder<double> &d)
{
    detail::write_magic(out, "PWDC");
    detail::write_le<std::uint32_t>(out, kDecoderFormatVersion);
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(d.reduced_dim()));
    detail::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(d.degree()));
    detail::write_le<std::uint64_t>(out, static_cast<std::uint64_t>(d.ambient_dim()));
    // The stacked matrix is already [T_p, ..., T_0]; column-major order matches the file.
    const auto &a = d.stacked();
    for (Index j = 0; j < a.cols(); ++j)
        for (Index i = 0; i < a.rows(); ++i)
            detail::write_le<double>(out, a(i, j));
}

PolynomialDecoder<double> read_decoder(std::istream &in)
{
    detail::expect_magic(in, "PWDC");
    const auto version = detail::read_le<std::uint32_t>(in);
    if (version != kDecoderFormatVersion)
        throw IoError("unsupported decoder format version " + std::to_string(version));
    const auto n = detail::read_le<std::uint32_t>(in);
    const auto p = detail::read_le<std::uint32_t>(in);
    const auto rows = detail::read_le<std::uint64_t>(in);
    if (n == 0 || rows == 0 || rows > (1ull << 32))
        throw IoError("decoder header has implausible dimensions");
    const auto cols = total_dimension(n, p);
    if (cols > (1ull << 32))
        throw IoError("decoder header has implausible dimensions");

    Eigen::MatrixXd stacked(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index j = 0; j < stacked.cols(); ++j)
        for (Index i = 0; i < stacked.rows(); ++i)
            stacked(i, j) = detail::read_le<double>(in);
    try {
        return PolynomialDecoder<double>::from_stacked(n, p, std::move(stacked));
    } catch (const ContractViolation &e) {
        throw IoError(std::string("invalid decoder file: ") + e.what());
    }
}

void save_decoder(const std::filesystem::path &path, const PolynomialDecoder<double> &d)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    write_decoder(out, d);
}

PolynomialDecoder<double> load_decoder(const std::filesystem::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    return read_decoder(in);
}

std::string decoder_to_json(const PolynomialDecoder<double> &d)
{
    nlohmann::json doc;
    doc["magic"] = "PWDC";
    doc["version"] = kDecoderFormatVersion;
    doc["n"] = d.reduced_dim();
    doc["p"] = d.degree();
    doc["N"] = d.ambient_dim();
    nlohmann::json blocks = nlohmann::json::array();
    for (Index k = d.degree(); k >= 0; --k) {
        const Eigen::MatrixXd t = d.mapping_matrix(k);
        blocks.push_back({{"degree", k},
                          {"rows", t.rows()},
                          {"cols", t.cols()},
                          {"data", std::vector<double>(t.data(), t.data() + t.size())}});
    }
    doc["mapping_matrices"] = std::move(blocks);
    return doc.dump();
}

PolynomialDecoder<double> decoder_from_json(const std::string &text)
{
    try {
        const auto doc = nlohmann::json::parse(text);
        const Index n = doc.at("n").get<Index>();
        const Index p = doc.at("p").get<Index>();
        const Index rows = doc.at("N").get<Index>();
        if (n < 1 || p < 0 || rows < 1)
            throw IoError("decoder JSON has invalid dimensions");
        std::vector<Eigen::MatrixXd> mats(static_cast<std::size_t>(p + 1));
        std::vector<bool> seen(static_cast<std::size_t>(p + 1), false);
        for (const auto &block : doc.at("mapping_matrices")) {
            const Index k = block.at("degree").get<Index>();
            if (k < 0 || k > p || seen[static_cast<std::size_t>(k)])
                throw IoError("decoder JSON has a bad or repeated degree");
            const auto data = block.at("data").get<std::vector<double>>();
            const Index r = block.at("rows").get<Index>();
            const Index c = block.at("cols").get<Index>();
            if (static_cast<Index>(data.size()) != r * c)
                throw IoError("decoder JSON block size does not match rows * cols");
            mats[static_cast<std::size_t>(k)] = Eigen::Map<const Eigen::MatrixXd>(data.data(), r, c);
            seen[static_cast<std::size_t>(k)] = true;
        }
        for (bool s : seen)
            if (!s)
                throw IoError("decoder JSON is missing a mapping matrix");
        return PolynomialDecoder<double>(n, p, rows, mats);
    } catch (const nlohmann::json::exception &e) {
        throw IoError(std::string("malformed decoder JSON: ") + e.what());
    } catch (const ContractViolation &e) {
        throw IoError(std::string("invalid decoder JSON: ") + e.what());
    }
}

} // namespace polywidth
