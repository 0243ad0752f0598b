#include "socratic/smeb.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace socratic {

namespace {

static_assert(std::endian::native == std::endian::little,
              "SMEB I/O assumes a little-endian host");

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw InputError("SMEB: truncated file");
    return v;
}

}  // namespace

void smeb_write(const std::string& path, const Eigen::Ref<const Mat>& rows,
                const std::vector<std::string>* ids) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw InputError("SMEB: cannot open for write: " + path);
    os.write("SMEB", 4);
    put<std::uint32_t>(os, 1);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(rows.cols()));
    put<std::uint64_t>(os, static_cast<std::uint64_t>(rows.rows()));
    for (Eigen::Index r = 0; r < rows.rows(); ++r)
        os.write(reinterpret_cast<const char*>(rows.row(r).data()),
                 static_cast<std::streamsize>(sizeof(float) * rows.cols()));
    if (ids) {
        if (static_cast<Eigen::Index>(ids->size()) != rows.rows())
            throw InputError("SMEB: id count does not match row count");
        std::string json = nlohmann::json(*ids).dump();
        put<std::uint64_t>(os, json.size());
        os.write(json.data(), static_cast<std::streamsize>(json.size()));
    }
    if (!os) throw InputError("SMEB: write failed: " + path);
}

SmebFile smeb_read(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("SMEB: cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "SMEB", 4) != 0)
        throw InputError("SMEB: bad magic in " + path);
    auto version = get<std::uint32_t>(is);
    if (version != 1) throw InputError("SMEB: unsupported version " + std::to_string(version));
    auto dim = get<std::uint32_t>(is);
    auto count = get<std::uint64_t>(is);
    if (dim == 0) throw InputError("SMEB: zero dim");
    SmebFile out;
    out.rows.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
    for (std::uint64_t r = 0; r < count; ++r) {
        is.read(reinterpret_cast<char*>(out.rows.row(static_cast<Eigen::Index>(r)).data()),
                static_cast<std::streamsize>(sizeof(float) * dim));
        if (!is) throw InputError("SMEB: truncated rows in " + path);
    }
    // Optional trailing id block.
    if (is.peek() != EOF) {
        auto len = get<std::uint64_t>(is);
        std::string json(len, '\0');
        is.read(json.data(), static_cast<std::streamsize>(len));
        if (!is) throw InputError("SMEB: truncated id block in " + path);
        auto parsed = nlohmann::json::parse(json, nullptr, false);
        if (parsed.is_discarded() || !parsed.is_array())
            throw InputError("SMEB: id block is not a JSON array in " + path);
        out.ids = parsed.get<std::vector<std::string>>();
        if (out.ids->size() != count) throw InputError("SMEB: id count mismatch in " + path);
    }
    return out;
}

}  // namespace socratic
