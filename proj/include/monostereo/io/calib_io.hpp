#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "monostereo/errors.hpp"
#include "monostereo/geometry.hpp"

namespace monostereo::io {

using nlohmann::json;

inline json intrinsics_to_json(const CameraIntrinsics& c) {
    return json{{"fx", c.fx},       {"fy", c.fy},           {"cx", c.cx},
                {"cy", c.cy},       {"width", c.width},     {"height", c.height}};
}

inline CameraIntrinsics intrinsics_from_json(const json& j) {
    CameraIntrinsics c;
    c.fx = j.at("fx").get<double>();
    c.fy = j.at("fy").get<double>();
    c.cx = j.at("cx").get<double>();
    c.cy = j.at("cy").get<double>();
    c.width = j.at("width").get<int>();
    c.height = j.at("height").get<int>();
    return c;
}

inline json rig_to_json(const RigModel& rig) {
    json t;
    t["rotation"] = rig.ir_to_rgb.rotation;
    t["translation"] = {rig.ir_to_rgb.translation.x, rig.ir_to_rgb.translation.y,
                        rig.ir_to_rgb.translation.z};
    return json{{"ir_cam", intrinsics_to_json(rig.ir_cam)},
                {"rgb_cam", intrinsics_to_json(rig.rgb_cam)},
                {"B", rig.baseline},
                {"B_m", rig.msl_baseline},
                {"Z_ref", rig.z_ref},
                {"T_ir_to_rgb", t}};
}

inline RigModel rig_from_json(const json& j) {
    RigModel rig;
    rig.ir_cam = intrinsics_from_json(j.at("ir_cam"));
    rig.rgb_cam = intrinsics_from_json(j.at("rgb_cam"));
    rig.baseline = j.at("B").get<double>();
    rig.msl_baseline = j.at("B_m").get<double>();
    rig.z_ref = j.at("Z_ref").get<double>();
    if (j.contains("T_ir_to_rgb")) {
        const json& t = j.at("T_ir_to_rgb");
        const auto rot = t.at("rotation").get<std::vector<double>>();
        if (rot.size() != 9)
            throw InvalidConfig("calibration: rotation must be a row-major 9-element array");
        std::copy(rot.begin(), rot.end(), rig.ir_to_rgb.rotation.begin());
        const auto tr = t.at("translation").get<std::vector<double>>();
        if (tr.size() != 3) throw InvalidConfig("calibration: translation must have 3 elements");
        rig.ir_to_rgb.translation = {tr[0], tr[1], tr[2]};
    } else {
        rig.ir_to_rgb.translation = {rig.baseline, 0.0, 0.0};
    }
    if (!rig.valid()) throw InvalidConfig("calibration failed rig validation");
    return rig;
}

inline void write_calibration(const std::string& path, const RigModel& rig) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_calibration: cannot open " + path);
    out << rig_to_json(rig).dump(2) << "\n";
}

inline RigModel read_calibration(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_calibration: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw MalformedHeader("read_calibration: " + path + ": " + e.what());
    }
    return rig_from_json(j);
}

} // namespace monostereo::io
