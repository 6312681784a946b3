// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#include "splatcolor/ply.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace splatcolor {

static_assert(std::endian::native == std::endian::little, "PLY codec assumes a little-endian host");

PlyError::PlyError(const std::string &message, std::size_t byte_offset, std::string property)
    : InputError("PLY: " + message + " (byte offset " + std::to_string(byte_offset) + ")"),
      byte_offset_(byte_offset), property_(std::move(property)) {}

namespace {

struct Property {
    std::string name;
    std::size_t size = 0;
    bool is_float32 = false;
    std::size_t offset = 0;
    std::size_t header_offset = 0;
};

std::optional<std::size_t> scalar_size(const std::string &type) {
    static const std::map<std::string, std::size_t> sizes = {
        {"char", 1},  {"int8", 1},    {"uchar", 1},  {"uint8", 1},   {"short", 2},
        {"int16", 2}, {"ushort", 2},  {"uint16", 2}, {"int", 4},     {"int32", 4},
        {"uint", 4},  {"uint32", 4},  {"float", 4},  {"float32", 4}, {"double", 8},
        {"float64", 8}};
    const auto it = sizes.find(type);
    if (it == sizes.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::vector<std::string> split_words(const std::string &line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    for (std::string w; in >> w;) {
        out.push_back(w);
    }
    return out;
}

/// Indexed family "prefix<k>" with k = 0..count-1, contiguous.
struct Family {
    std::vector<const Property *> members;
};

Family collect_family(const std::vector<Property> &props, const std::string &prefix,
                      std::size_t header_end) {
    std::map<int, const Property *> found;
    for (const auto &p : props) {
        if (p.name.rfind(prefix, 0) != 0) {
            continue;
        }
        const std::string suffix = p.name.substr(prefix.size());
        int index = -1;
        const auto [ptr, ec] = std::from_chars(suffix.data(), suffix.data() + suffix.size(), index);
        if (suffix.empty() || ec != std::errc() || ptr != suffix.data() + suffix.size() || index < 0) {
            continue;
        }
        if (!found.emplace(index, &p).second) {
            throw PlyError("duplicate property " + p.name, p.header_offset, p.name);
        }
    }
    Family f;
    int expected = 0;
    for (const auto &[index, prop] : found) {
        if (index != expected) {
            throw PlyError("property family " + prefix + "* is not contiguous: missing " + prefix +
                               std::to_string(expected),
                           prop->header_offset, prefix + std::to_string(expected));
        }
        f.members.push_back(prop);
        ++expected;
    }
    (void)header_end;
    return f;
}

float load_f32(const std::uint8_t *p) {
    float v;
    std::memcpy(&v, p, sizeof v);
    return v;
}

void store_f32(std::vector<std::uint8_t> &out, double v) {
    const auto f = static_cast<float>(v);
    std::uint8_t b[4];
    std::memcpy(b, &f, 4);
    out.insert(out.end(), b, b + 4);
}

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

} // namespace

GaussianScene decode_ply(std::span<const std::uint8_t> bytes) {
    std::size_t pos = 0;
    auto next_line = [&](std::size_t &line_start) -> std::string {
        line_start = pos;
        const auto *begin = bytes.data() + pos;
        const auto *end = bytes.data() + bytes.size();
        const auto *nl = std::find(begin, end, static_cast<std::uint8_t>('\n'));
        if (nl == end) {
            throw PlyError("header is not terminated by end_header", line_start);
        }
        std::string line(reinterpret_cast<const char *>(begin), static_cast<std::size_t>(nl - begin));
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        pos = static_cast<std::size_t>(nl - bytes.data()) + 1;
        return line;
    };

    std::size_t line_start = 0;
    if (next_line(line_start) != "ply") {
        throw PlyError("missing 'ply' magic", 0);
    }

    std::optional<std::size_t> vertex_count;
    bool format_seen = false;
    bool in_vertex = false;
    std::vector<Property> props;
    std::size_t stride = 0;
    for (;;) {
        const std::string line = next_line(line_start);
        const auto words = split_words(line);
        if (words.empty() || words[0] == "comment" || words[0] == "obj_info") {
            continue;
        }
        if (words[0] == "end_header") {
            break;
        }
        if (words[0] == "format") {
            if (words.size() != 3 || words[1] != "binary_little_endian") {
                throw PlyError("unsupported format line '" + line + "'", line_start);
            }
            format_seen = true;
        } else if (words[0] == "element") {
            if (words.size() != 3) {
                throw PlyError("malformed element line '" + line + "'", line_start);
            }
            if (words[1] != "vertex" || vertex_count) {
                throw PlyError("unsupported element '" + words[1] + "'", line_start);
            }
            std::size_t n = 0;
            const auto [ptr, ec] = std::from_chars(words[2].data(), words[2].data() + words[2].size(), n);
            if (ec != std::errc() || ptr != words[2].data() + words[2].size()) {
                throw PlyError("invalid vertex count '" + words[2] + "'", line_start);
            }
            vertex_count = n;
            in_vertex = true;
        } else if (words[0] == "property") {
            if (!in_vertex) {
                throw PlyError("property outside the vertex element", line_start);
            }
            if (words.size() != 3) {
                throw PlyError("unsupported property line '" + line + "'", line_start,
                               words.size() > 1 ? words.back() : std::string());
            }
            const auto size = scalar_size(words[1]);
            if (!size) {
                throw PlyError("unknown property type '" + words[1] + "'", line_start, words[2]);
            }
            for (const auto &p : props) {
                if (p.name == words[2]) {
                    throw PlyError("duplicate property " + words[2], line_start, words[2]);
                }
            }
            props.push_back({words[2], *size, words[1] == "float" || words[1] == "float32", stride, line_start});
            stride += *size;
        } else {
            throw PlyError("unrecognized header line '" + line + "'", line_start);
        }
    }
    const std::size_t header_end = pos;
    if (!format_seen) {
        throw PlyError("missing format line", header_end);
    }
    if (!vertex_count) {
        throw PlyError("missing vertex element", header_end);
    }

    auto find = [&](const std::string &name) -> const Property & {
        for (const auto &p : props) {
            if (p.name == name) {
                if (!p.is_float32) {
                    throw PlyError("property " + name + " must be float", p.header_offset, name);
                }
                return p;
            }
        }
        throw PlyError("missing property " + name, header_end, name);
    };
    auto family = [&](const std::string &prefix, std::optional<std::size_t> required) {
        Family f = collect_family(props, prefix, header_end);
        if (required && f.members.size() != *required) {
            std::ostringstream msg;
            msg << "expected " << *required << " " << prefix << "* properties, found " << f.members.size();
            const std::size_t at = f.members.empty() ? header_end : f.members.back()->header_offset;
            throw PlyError(msg.str(), at, prefix);
        }
        for (const auto *p : f.members) {
            if (!p->is_float32) {
                throw PlyError("property " + p->name + " must be float", p->header_offset, p->name);
            }
        }
        return f;
    };

    const Property &px = find("x");
    const Property &py = find("y");
    const Property &pz = find("z");
    const Property &popacity = find("opacity");
    const Family scale = family("scale_", 3);
    const Family rot = family("rot_", 4);
    const Family dc = family("f_dc_", std::nullopt);
    const Family rest = family("f_rest_", std::nullopt);
    if (dc.members.empty()) {
        throw PlyError("missing property f_dc_0", header_end, "f_dc_0");
    }
    const std::size_t channels = dc.members.size();
    if (rest.members.size() % channels != 0) {
        throw PlyError("f_rest_* count " + std::to_string(rest.members.size()) +
                           " is not a multiple of the channel count " + std::to_string(channels),
                       header_end, "f_rest_");
    }
    const std::size_t rest_per_channel = rest.members.size() / channels;
    int order = -1;
    for (int l = 0; l <= 3; ++l) {
        if (static_cast<std::size_t>(sh_coeff_count(l) - 1) == rest_per_channel) {
            order = l;
        }
    }
    if (order < 0) {
        throw PlyError("f_rest_* count " + std::to_string(rest.members.size()) +
                           " does not match any SH order up to 3",
                       header_end, "f_rest_");
    }

    const std::size_t n = *vertex_count;
    const std::size_t available = bytes.size() - header_end;
    if (stride == 0 || available / stride < n) {
        const std::size_t complete = stride == 0 ? 0 : available / stride;
        throw PlyError("truncated payload: " + std::to_string(n) + " vertices declared, " +
                           std::to_string(complete) + " present",
                       header_end + complete * stride);
    }
    if (available != n * stride) {
        throw PlyError("unexpected trailing bytes after the vertex payload", header_end + n * stride);
    }

    GaussianScene scene(order, static_cast<int>(channels));
    const int m = scene.coeffs_per_channel();
    scene.means.resize(n);
    scene.scales.resize(n);
    scene.rotations.resize(n);
    scene.opacities.resize(n);
    scene.sh_coeffs.resize(n * scene.coeffs_per_gaussian());
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint8_t *row = bytes.data() + header_end + i * stride;
        auto get = [row](const Property &p) { return static_cast<double>(load_f32(row + p.offset)); };
        scene.means[i] = Vec3(get(px), get(py), get(pz));
        scene.scales[i] = Vec3(std::exp(get(*scale.members[0])), std::exp(get(*scale.members[1])),
                               std::exp(get(*scale.members[2])));
        scene.rotations[i] = Quat(get(*rot.members[0]), get(*rot.members[1]), get(*rot.members[2]),
                                  get(*rot.members[3]));
        scene.opacities[i] = sigmoid(get(popacity));
        for (std::size_t k = 0; k < channels; ++k) {
            auto c = scene.coeffs(i, static_cast<int>(k));
            c[0] = get(*dc.members[k]);
            for (int j = 1; j < m; ++j) {
                c[j] = get(*rest.members[k * rest_per_channel + (j - 1)]);
            }
        }
    }
    return scene;
}

std::vector<std::uint8_t> encode_ply(const GaussianScene &scene) {
    if (const auto issues = validate_scene(scene); !issues.empty()) {
        std::ostringstream msg;
        msg << "cannot encode invalid scene: ";
        if (issues.front().gaussian >= 0) {
            msg << "Gaussian " << issues.front().gaussian << ": ";
        }
        msg << issues.front().what;
        throw InputError(msg.str());
    }
    const int channels = scene.channels;
    const int m = scene.coeffs_per_channel();

    std::ostringstream header;
    header << "ply\nformat binary_little_endian 1.0\nelement vertex " << scene.size() << "\n";
    for (const char *name : {"x", "y", "z"}) {
        header << "property float " << name << "\n";
    }
    for (int k = 0; k < channels; ++k) {
        header << "property float f_dc_" << k << "\n";
    }
    for (int r = 0; r < channels * (m - 1); ++r) {
        header << "property float f_rest_" << r << "\n";
    }
    header << "property float opacity\n";
    for (int s = 0; s < 3; ++s) {
        header << "property float scale_" << s << "\n";
    }
    for (int q = 0; q < 4; ++q) {
        header << "property float rot_" << q << "\n";
    }
    header << "end_header\n";

    const std::string h = header.str();
    const std::size_t floats = 3 + static_cast<std::size_t>(channels) * m + 1 + 3 + 4;
    std::vector<std::uint8_t> out(h.begin(), h.end());
    out.reserve(h.size() + scene.size() * floats * 4);
    for (std::size_t i = 0; i < scene.size(); ++i) {
        for (int d = 0; d < 3; ++d) {
            store_f32(out, scene.means[i][d]);
        }
        for (int k = 0; k < channels; ++k) {
            store_f32(out, scene.coeffs(i, k)[0]);
        }
        for (int k = 0; k < channels; ++k) {
            const auto c = scene.coeffs(i, k);
            for (int j = 1; j < m; ++j) {
                store_f32(out, c[j]);
            }
        }
        store_f32(out, logit(scene.opacities[i]));
        for (int d = 0; d < 3; ++d) {
            store_f32(out, std::log(scene.scales[i][d]));
        }
        for (int d = 0; d < 4; ++d) {
            store_f32(out, scene.rotations[i][d]);
        }
    }
    return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    in.seekg(0, std::ios::end);
    const auto size = static_cast<std::size_t>(in.tellg());
    in.seekg(0, std::ios::beg);
    std::vector<std::uint8_t> bytes(size);
    if (size > 0 && !in.read(reinterpret_cast<char *>(bytes.data()), static_cast<std::streamsize>(size))) {
        throw InputError("failed to read " + path.string());
    }
    return bytes;
}

void write_file_bytes(const std::filesystem::path &path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InputError("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw InputError("failed to write " + path.string());
    }
}

GaussianScene read_ply(const std::filesystem::path &path) { return decode_ply(read_file_bytes(path)); }

void write_ply(const GaussianScene &scene, const std::filesystem::path &path) {
    write_file_bytes(path, encode_ply(scene));
}

} // namespace splatcolor
