// Copyright Contributors to the Splatcolor Project
// SPDX-License-Identifier: Apache-2.0

#include "splatcolor/cameras.hpp"

#include "splatcolor/errors.hpp"
#include "splatcolor/image_io.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace splatcolor {

namespace {

using nlohmann::json;

constexpr int kManifestVersion = 1;

template <class T>
T field(const json &j, const char *name, const std::string &where) {
    if (!j.contains(name)) {
        throw InputError(where + ": missing field '" + name + "'");
    }
    try {
        return j.at(name).get<T>();
    } catch (const json::exception &) {
        throw InputError(where + ": field '" + name + "' has the wrong type");
    }
}

} // namespace

std::vector<CameraEntry> parse_camera_manifest(const std::string &text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error &e) {
        throw InputError(std::string("camera manifest: ") + e.what());
    }
    if (!root.is_object()) {
        throw InputError("camera manifest: top level must be an object");
    }
    const int version = field<int>(root, "version", "camera manifest");
    if (version != kManifestVersion) {
        throw InputError("camera manifest: unsupported version " + std::to_string(version));
    }
    if (!root.contains("views") || !root["views"].is_array()) {
        throw InputError("camera manifest: 'views' must be an array");
    }

    std::vector<CameraEntry> out;
    std::set<std::string> ids;
    for (std::size_t n = 0; n < root["views"].size(); ++n) {
        const json &v = root["views"][n];
        const std::string where = "camera manifest view " + std::to_string(n);
        CameraEntry e;
        e.id = field<std::string>(v, "id", where);
        if (e.id.empty()) {
            throw InputError(where + ": empty id");
        }
        if (!ids.insert(e.id).second) {
            throw InputError(where + ": duplicate id '" + e.id + "'");
        }
        const std::string at = "view '" + e.id + "'";
        e.view.width = field<int>(v, "width", at);
        e.view.height = field<int>(v, "height", at);
        e.view.fx = field<double>(v, "fx", at);
        e.view.fy = field<double>(v, "fy", at);
        e.view.cx = field<double>(v, "cx", at);
        e.view.cy = field<double>(v, "cy", at);
        const auto m = field<std::vector<std::vector<double>>>(v, "world_to_camera", at);
        if (m.size() != 4) {
            throw InputError(at + ": world_to_camera must have 4 rows");
        }
        for (int r = 0; r < 4; ++r) {
            if (m[r].size() != 4) {
                throw InputError(at + ": world_to_camera must have 4 columns");
            }
            for (int c = 0; c < 4; ++c) {
                e.view.world_to_camera(r, c) = m[r][c];
            }
        }
        e.image = field<std::string>(v, "image", at);
        if (const auto issues = validate_camera(e.view); !issues.empty()) {
            throw InputError(at + ": " + issues.front());
        }
        out.push_back(std::move(e));
    }
    return out;
}

std::string format_camera_manifest(std::span<const CameraEntry> views) {
    json views_json = json::array();
    for (const auto &e : views) {
        json m = json::array();
        for (int r = 0; r < 4; ++r) {
            m.push_back({e.view.world_to_camera(r, 0), e.view.world_to_camera(r, 1),
                         e.view.world_to_camera(r, 2), e.view.world_to_camera(r, 3)});
        }
        views_json.push_back({{"id", e.id},
                              {"width", e.view.width},
                              {"height", e.view.height},
                              {"fx", e.view.fx},
                              {"fy", e.view.fy},
                              {"cx", e.view.cx},
                              {"cy", e.view.cy},
                              {"world_to_camera", m},
                              {"image", e.image}});
    }
    return json{{"version", kManifestVersion}, {"views", views_json}}.dump(2);
}

std::vector<CameraEntry> read_camera_manifest(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open camera manifest " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_camera_manifest(buffer.str());
}

void write_camera_manifest(std::span<const CameraEntry> views, const std::filesystem::path &path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw InputError("cannot open " + path.string() + " for writing");
    }
    out << format_camera_manifest(views) << "\n";
}

std::vector<ChannelImage> load_view_images(std::span<const CameraEntry> views,
                                           const std::filesystem::path &dir) {
    std::vector<ChannelImage> out;
    out.reserve(views.size());
    for (const auto &e : views) {
        const auto path = dir / e.image;
        if (!std::filesystem::exists(path)) {
            throw InputError("view '" + e.id + "': image " + path.string() + " does not exist");
        }
        ChannelImage image;
        try {
            image = read_image(path);
            check_image_matches(image, e.view, "view '" + e.id + "'");
        } catch (const InputError &err) {
            const std::string what = err.what();
            if (what.find("view '" + e.id + "'") == std::string::npos) {
                throw InputError("view '" + e.id + "': " + what);
            }
            throw;
        }
        out.push_back(std::move(image));
    }
    return out;
}

std::vector<CameraView> views_of(std::span<const CameraEntry> entries) {
    std::vector<CameraView> out;
    out.reserve(entries.size());
    for (const auto &e : entries) {
        out.push_back(e.view);
    }
    return out;
}

} // namespace splatcolor
