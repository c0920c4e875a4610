#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "monostereo/errors.hpp"
#include "monostereo/io/png_io.hpp"
#include "monostereo/rng.hpp"
#include "monostereo/speckle_sim.hpp"

namespace monostereo::io {

using nlohmann::json;

inline json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

inline Vec3 vec3_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3)
        throw InvalidConfig("scene: expected a 3-element [x, y, z] array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json albedo_to_json(const AlbedoSpec& a) {
    switch (a.kind) {
        case AlbedoSpec::Kind::Uniform:
            return json{{"kind", "uniform"}, {"value", a.value}};
        case AlbedoSpec::Kind::Noise:
            return json{{"kind", "noise"},
                        {"scale", a.scale},
                        {"lo", a.lo},
                        {"hi", a.hi},
                        {"seed", a.noise_seed}};
        case AlbedoSpec::Kind::Image:
            return json{{"kind", "image"}, {"path", a.image_path}, {"fallback", a.value}};
    }
    return json{{"kind", "uniform"}, {"value", a.value}};
}

/// base_dir resolves relative texture paths for image-backed albedos.
inline AlbedoSpec albedo_from_json(const json& j, const std::filesystem::path& base_dir) {
    AlbedoSpec a;
    const std::string kind = j.value("kind", "uniform");
    if (kind == "uniform") {
        a.kind = AlbedoSpec::Kind::Uniform;
        a.value = j.value("value", a.value);
    } else if (kind == "noise") {
        a.kind = AlbedoSpec::Kind::Noise;
        a.scale = j.value("scale", a.scale);
        a.lo = j.value("lo", a.lo);
        a.hi = j.value("hi", a.hi);
        a.noise_seed = j.value("seed", a.noise_seed);
    } else if (kind == "image") {
        a.kind = AlbedoSpec::Kind::Image;
        if (!j.contains("path")) throw InvalidConfig("scene: image albedo needs a path");
        a.image_path = j.at("path").get<std::string>();
        a.image = read_png_gray((base_dir / a.image_path).string());
        a.value = j.value("fallback", a.value);
    } else {
        throw InvalidConfig("scene: unknown albedo kind '" + kind + "'");
    }
    return a;
}

inline json primitive_to_json(const ScenePrimitive& p) {
    json j;
    switch (p.kind) {
        case ScenePrimitive::Kind::FrontoPlane:
            j["kind"] = "fronto_plane";
            j["z"] = p.z;
            if (p.bounded) {
                j["bounds"] = json{{"cx", p.bound_cx},
                                   {"cy", p.bound_cy},
                                   {"half_x", p.half_x},
                                   {"half_y", p.half_y}};
            }
            break;
        case ScenePrimitive::Kind::SlantedPlane:
            j["kind"] = "slanted_plane";
            j["point"] = vec3_to_json(p.point);
            j["normal"] = vec3_to_json(p.normal);
            break;
        case ScenePrimitive::Kind::Sphere:
            j["kind"] = "sphere";
            j["center"] = vec3_to_json(p.center);
            j["radius"] = p.radius;
            break;
        case ScenePrimitive::Kind::Quad:
            j["kind"] = "quad";
            j["center"] = vec3_to_json(p.quad_center);
            j["edge_u"] = vec3_to_json(p.edge_u);
            j["edge_v"] = vec3_to_json(p.edge_v);
            break;
    }
    j["albedo"] = albedo_to_json(p.albedo);
    return j;
}

inline ScenePrimitive primitive_from_json(const json& j,
                                          const std::filesystem::path& base_dir) {
    ScenePrimitive p;
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "fronto_plane") {
        p.kind = ScenePrimitive::Kind::FrontoPlane;
        p.z = j.at("z").get<double>();
        if (j.contains("bounds")) {
            const json& b = j.at("bounds");
            p.bounded = true;
            p.bound_cx = b.value("cx", 0.0);
            p.bound_cy = b.value("cy", 0.0);
            p.half_x = b.at("half_x").get<double>();
            p.half_y = b.at("half_y").get<double>();
        }
    } else if (kind == "slanted_plane") {
        p.kind = ScenePrimitive::Kind::SlantedPlane;
        p.point = vec3_from_json(j.at("point"));
        p.normal = vec3_from_json(j.at("normal"));
    } else if (kind == "sphere") {
        p.kind = ScenePrimitive::Kind::Sphere;
        p.center = vec3_from_json(j.at("center"));
        p.radius = j.at("radius").get<double>();
        if (p.radius <= 0.0) throw InvalidConfig("scene: sphere radius must be > 0");
    } else if (kind == "quad") {
        p.kind = ScenePrimitive::Kind::Quad;
        p.quad_center = vec3_from_json(j.at("center"));
        p.edge_u = vec3_from_json(j.at("edge_u"));
        p.edge_v = vec3_from_json(j.at("edge_v"));
    } else {
        throw InvalidConfig("scene: unknown primitive kind '" + kind + "'");
    }
    if (j.contains("albedo")) p.albedo = albedo_from_json(j.at("albedo"), base_dir);
    return p;
}

inline json scene_to_json(const Scene& scene, const std::string& name) {
    json j;
    j["name"] = name;
    j["primitives"] = json::array();
    for (const ScenePrimitive& p : scene) j["primitives"].push_back(primitive_to_json(p));
    return j;
}

inline Scene scene_from_json(const json& j, const std::filesystem::path& base_dir) {
    Scene scene;
    for (const json& p : j.at("primitives")) scene.push_back(primitive_from_json(p, base_dir));
    validate_scene(scene);
    return scene;
}

/// A scene file plus the identity facts the dataset records about it.
struct SceneFile {
    std::string name;
    Scene scene;
    uint64_t content_hash = 0; // FNV-1a over the raw file bytes
};

inline SceneFile read_scene(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_scene: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();

    json j;
    try {
        j = json::parse(content);
    } catch (const json::parse_error& e) {
        throw MalformedHeader("read_scene: " + path + ": " + e.what());
    }
    SceneFile file;
    file.name = j.value("name", std::filesystem::path(path).stem().string());
    file.scene = scene_from_json(j, std::filesystem::path(path).parent_path());
    file.content_hash = fnv1a64(content);
    return file;
}

inline void write_scene(const std::string& path, const Scene& scene, const std::string& name) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_scene: cannot open " + path);
    out << scene_to_json(scene, name).dump(2) << "\n";
}

} // namespace monostereo::io
