#include "mrl/scene.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mrl/errors.hpp"

namespace mrl {

using nlohmann::json;

namespace {

constexpr double kUnitTol = 1e-9;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw InputError(path.empty() ? what : path + ": " + what);
}

const json& expect_object(const json& j, const std::string& path,
                          const std::set<std::string>& allowed,
                          const std::set<std::string>& required) {
    if (!j.is_object()) fail(path, "expected an object");
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) fail(path, "unknown field '" + key + "'");
    }
    for (const auto& key : required) {
        if (!j.contains(key)) fail(path, "missing field '" + key + "'");
    }
    return j;
}

double expect_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "number must be finite");
    return v;
}

std::string expect_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

Vec3 expect_vec3(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) fail(path, "expected an array of 3 numbers");
    return {expect_number(j[0], path + "[0]"), expect_number(j[1], path + "[1]"),
            expect_number(j[2], path + "[2]")};
}

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

}  // namespace

UserPose UserPose::validated(const Vec3& eye, const Vec3& forward, const Vec3& up) {
    if (!eye.finite() || !forward.finite() || !up.finite())
        throw InputError("user pose: components must be finite");
    if (std::fabs(forward.norm() - 1.0) > kUnitTol)
        throw InputError("user pose: forward must be unit length");
    if (std::fabs(up.norm() - 1.0) > kUnitTol)
        throw InputError("user pose: up must be unit length");
    if (std::fabs(forward.dot(up)) > kUnitTol)
        throw InputError("user pose: forward and up must be orthogonal");
    return UserPose{eye, forward, up};
}

Box3 Box3::validated(const Vec3& center, const Vec3& half_extents) {
    if (!center.finite() || !half_extents.finite())
        throw InputError("box: components must be finite");
    if (half_extents.x <= 0.0 || half_extents.y <= 0.0 || half_extents.z <= 0.0)
        throw InputError("box: half extents must be positive on every axis");
    return Box3{center, half_extents};
}

bool Box3::contains(const Vec3& p, double tol) const {
    return std::fabs(p.x - center.x) <= half_extents.x + tol &&
           std::fabs(p.y - center.y) <= half_extents.y + tol &&
           std::fabs(p.z - center.z) <= half_extents.z + tol;
}

double box_iou(const Box3& a, const Box3& b) {
    const Vec3 lo{std::max(a.min_corner().x, b.min_corner().x),
                  std::max(a.min_corner().y, b.min_corner().y),
                  std::max(a.min_corner().z, b.min_corner().z)};
    const Vec3 hi{std::min(a.max_corner().x, b.max_corner().x),
                  std::min(a.max_corner().y, b.max_corner().y),
                  std::min(a.max_corner().z, b.max_corner().z)};
    const double ix = std::max(0.0, hi.x - lo.x);
    const double iy = std::max(0.0, hi.y - lo.y);
    const double iz = std::max(0.0, hi.z - lo.z);
    const double inter = ix * iy * iz;
    const double va = 8.0 * a.half_extents.x * a.half_extents.y * a.half_extents.z;
    const double vb = 8.0 * b.half_extents.x * b.half_extents.y * b.half_extents.z;
    const double uni = va + vb - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

PhysicalEntity PhysicalEntity::validated(std::string id, std::string label, const Box3& box,
                                         double overlay_rating, double interaction_rating) {
    if (id.empty()) throw InputError("entity: id must be non-empty");
    if (!(overlay_rating >= 0.0 && overlay_rating <= 1.0))
        throw InputError("entity '" + id + "': overlay_rating must be in [0,1]");
    if (!(interaction_rating >= 0.0 && interaction_rating <= 1.0))
        throw InputError("entity '" + id + "': interaction_rating must be in [0,1]");
    return PhysicalEntity{std::move(id), std::move(label), box, overlay_rating,
                          interaction_rating};
}

UiElement UiElement::validated(std::string id, std::string name, double width, double height,
                               double interaction_frequency) {
    if (id.empty()) throw InputError("element: id must be non-empty");
    if (!(width > 0.0) || !(height > 0.0))
        throw InputError("element '" + id + "': width and height must be positive");
    if (!(interaction_frequency >= 0.0 && interaction_frequency <= 1.0))
        throw InputError("element '" + id + "': interaction_frequency must be in [0,1]");
    return UiElement{std::move(id), std::move(name), width, height, interaction_frequency};
}

Scene Scene::validated(UserPose user, std::vector<PhysicalEntity> entities,
                       std::vector<UiElement> elements) {
    std::set<std::string> ids;
    for (const auto& e : entities) {
        if (!ids.insert(e.id).second) throw InputError("duplicate id '" + e.id + "'");
    }
    for (const auto& e : elements) {
        if (!ids.insert(e.id).second) throw InputError("duplicate id '" + e.id + "'");
    }
    return Scene{user, std::move(entities), std::move(elements)};
}

const PhysicalEntity* Scene::find_entity(const std::string& id) const {
    for (const auto& e : entities)
        if (e.id == id) return &e;
    return nullptr;
}

const UiElement* Scene::find_element(const std::string& id) const {
    for (const auto& e : elements)
        if (e.id == id) return &e;
    return nullptr;
}

const Vec3& Layout::position_of(const std::string& element_id) const {
    const auto it = positions.find(element_id);
    if (it == positions.end())
        throw InputError("layout is missing element '" + element_id + "'");
    return it->second;
}

bool Layout::covers(const Scene& scene) const {
    for (const auto& e : scene.elements) {
        const auto it = positions.find(e.id);
        if (it == positions.end() || !it->second.finite()) return false;
    }
    return true;
}

double normalize_rating(int score) {
    if (score < 1 || score > 5)
        throw InputError("rating score must be in 1..5, got " + std::to_string(score));
    return static_cast<double>(score - 1) / 4.0;
}

namespace {

PhysicalEntity parse_entity(const json& j, const std::string& path) {
    expect_object(j, path,
                  {"id", "label", "box", "overlay_rating", "interaction_rating"},
                  {"id", "label", "box"});
    const std::string id = expect_string(j.at("id"), path + ".id");
    const std::string label = expect_string(j.at("label"), path + ".label");
    const json& jb = expect_object(j.at("box"), path + ".box", {"center", "half_extents"},
                                   {"center", "half_extents"});
    Box3 box;
    try {
        box = Box3::validated(expect_vec3(jb.at("center"), path + ".box.center"),
                              expect_vec3(jb.at("half_extents"), path + ".box.half_extents"));
    } catch (const InputError& e) {
        fail(path, std::string(e.what()) + " (entity '" + id + "')");
    }
    const double ov = j.contains("overlay_rating")
                          ? expect_number(j.at("overlay_rating"), path + ".overlay_rating")
                          : 0.5;
    const double iv = j.contains("interaction_rating")
                          ? expect_number(j.at("interaction_rating"), path + ".interaction_rating")
                          : 0.5;
    return PhysicalEntity::validated(id, label, box, ov, iv);
}

json entity_to_json(const PhysicalEntity& e) {
    json j;
    j["id"] = e.id;
    j["label"] = e.label;
    j["box"]["center"] = vec3_to_json(e.box.center);
    j["box"]["half_extents"] = vec3_to_json(e.box.half_extents);
    j["overlay_rating"] = e.overlay_rating;
    j["interaction_rating"] = e.interaction_rating;
    return j;
}

json parse_text(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string(what) + " parse error: " + e.what());
    }
}

}  // namespace

Scene load_scene(const std::string& text) {
    const json j = parse_text(text, "scene");
    expect_object(j, "", {"user", "entities", "elements"}, {"user", "elements"});
    const json& ju = expect_object(j.at("user"), "user", {"eye", "forward", "up"},
                                   {"eye", "forward", "up"});
    UserPose user = UserPose::validated(expect_vec3(ju.at("eye"), "user.eye"),
                                        expect_vec3(ju.at("forward"), "user.forward"),
                                        expect_vec3(ju.at("up"), "user.up"));

    std::vector<PhysicalEntity> entities;
    if (j.contains("entities")) {
        if (!j.at("entities").is_array()) fail("entities", "expected an array");
        int i = 0;
        for (const auto& je : j.at("entities")) {
            entities.push_back(parse_entity(je, "entities[" + std::to_string(i) + "]"));
            ++i;
        }
    }

    if (!j.at("elements").is_array()) fail("elements", "expected an array");
    std::vector<UiElement> elements;
    int i = 0;
    for (const auto& je : j.at("elements")) {
        const std::string path = "elements[" + std::to_string(i) + "]";
        expect_object(je, path, {"id", "name", "width", "height", "interaction_frequency"},
                      {"id", "width", "height", "interaction_frequency"});
        const std::string id = expect_string(je.at("id"), path + ".id");
        const std::string name =
            je.contains("name") ? expect_string(je.at("name"), path + ".name") : id;
        elements.push_back(UiElement::validated(
            id, name, expect_number(je.at("width"), path + ".width"),
            expect_number(je.at("height"), path + ".height"),
            expect_number(je.at("interaction_frequency"), path + ".interaction_frequency")));
        ++i;
    }

    return Scene::validated(user, std::move(entities), std::move(elements));
}

std::string save_scene(const Scene& scene) {
    json j;
    j["user"]["eye"] = vec3_to_json(scene.user.eye);
    j["user"]["forward"] = vec3_to_json(scene.user.forward);
    j["user"]["up"] = vec3_to_json(scene.user.up);
    j["entities"] = json::array();
    for (const auto& e : scene.entities) j["entities"].push_back(entity_to_json(e));
    j["elements"] = json::array();
    for (const auto& e : scene.elements) {
        json je;
        je["id"] = e.id;
        je["name"] = e.name;
        je["width"] = e.width;
        je["height"] = e.height;
        je["interaction_frequency"] = e.interaction_frequency;
        j["elements"].push_back(je);
    }
    return j.dump(2) + "\n";
}

std::vector<PhysicalEntity> load_entities(const std::string& text) {
    const json j = parse_text(text, "entities");
    expect_object(j, "", {"entities"}, {"entities"});
    if (!j.at("entities").is_array()) fail("entities", "expected an array");
    std::vector<PhysicalEntity> out;
    std::set<std::string> ids;
    int i = 0;
    for (const auto& je : j.at("entities")) {
        out.push_back(parse_entity(je, "entities[" + std::to_string(i) + "]"));
        if (!ids.insert(out.back().id).second)
            throw InputError("duplicate id '" + out.back().id + "'");
        ++i;
    }
    return out;
}

std::string save_entities(const std::vector<PhysicalEntity>& entities) {
    json j;
    j["entities"] = json::array();
    for (const auto& e : entities) j["entities"].push_back(entity_to_json(e));
    return j.dump(2) + "\n";
}

std::string save_layout(const Layout& layout, const Scene& scene) {
    std::vector<std::string> ids;
    ids.reserve(scene.elements.size());
    for (const auto& e : scene.elements) {
        if (!layout.positions.count(e.id))
            throw InputError("layout is missing element '" + e.id + "'");
        ids.push_back(e.id);
    }
    std::sort(ids.begin(), ids.end());
    json j;
    j["layouts"] = json::array();
    for (const auto& id : ids) {
        json je;
        je["element_id"] = id;
        je["position"] = vec3_to_json(layout.positions.at(id));
        j["layouts"].push_back(je);
    }
    return j.dump(2) + "\n";
}

Layout load_layout(const std::string& text) {
    const json j = parse_text(text, "layout");
    expect_object(j, "", {"layouts"}, {"layouts"});
    if (!j.at("layouts").is_array()) fail("layouts", "expected an array");
    Layout layout;
    int i = 0;
    for (const auto& je : j.at("layouts")) {
        const std::string path = "layouts[" + std::to_string(i) + "]";
        expect_object(je, path, {"element_id", "position"}, {"element_id", "position"});
        const std::string id = expect_string(je.at("element_id"), path + ".element_id");
        const Vec3 pos = expect_vec3(je.at("position"), path + ".position");
        if (!layout.positions.emplace(id, pos).second)
            throw InputError("duplicate layout entry for element '" + id + "'");
        ++i;
    }
    return layout;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write file: " + path);
    out << content;
}

}  // namespace mrl
