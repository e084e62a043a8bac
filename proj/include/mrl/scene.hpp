#pragma once

#include <map>
#include <string>
#include <vector>

#include "mrl/vec3.hpp"

namespace mrl {

// Viewer pose. forward/up must be unit length and orthogonal (1e-9).
struct UserPose {
    Vec3 eye;
    Vec3 forward{0.0, 0.0, 1.0};
    Vec3 up{0.0, 1.0, 0.0};

    static UserPose validated(const Vec3& eye, const Vec3& forward, const Vec3& up);
};

// Axis-aligned box. half_extents strictly positive per axis.
struct Box3 {
    Vec3 center;
    Vec3 half_extents;

    static Box3 validated(const Vec3& center, const Vec3& half_extents);

    Vec3 min_corner() const { return center - half_extents; }
    Vec3 max_corner() const { return center + half_extents; }
    // Full diagonal length d_b = 2*||half_extents||.
    double diagonal() const { return 2.0 * half_extents.norm(); }
    bool contains(const Vec3& p, double tol = 0.0) const;
};

double box_iou(const Box3& a, const Box3& b);

// A rated physical object or person. Ratings are stored already
// normalized to [0,1]; raw 1..5 scores exist only at the rating boundary.
struct PhysicalEntity {
    std::string id;
    std::string label;
    Box3 box;
    double overlay_rating = 0.5;
    double interaction_rating = 0.5;

    static PhysicalEntity validated(std::string id, std::string label, const Box3& box,
                                    double overlay_rating, double interaction_rating);
};

// A rectangular virtual widget; always billboards toward the user's eye.
struct UiElement {
    std::string id;
    std::string name;
    double width = 0.0;
    double height = 0.0;
    double interaction_frequency = 0.0;

    static UiElement validated(std::string id, std::string name, double width, double height,
                               double interaction_frequency);
};

struct Scene {
    UserPose user;
    std::vector<PhysicalEntity> entities;
    std::vector<UiElement> elements;

    static Scene validated(UserPose user, std::vector<PhysicalEntity> entities,
                           std::vector<UiElement> elements);

    const PhysicalEntity* find_entity(const std::string& id) const;
    const UiElement* find_element(const std::string& id) const;
};

// Decision vector: one world position per element center. Orientation is
// implied (billboard toward the user's eye).
struct Layout {
    std::map<std::string, Vec3> positions;

    const Vec3& position_of(const std::string& element_id) const;
    // True when every element of the scene has exactly one finite position.
    bool covers(const Scene& scene) const;
};

// Linear map {1..5} -> {0, 0.25, 0.5, 0.75, 1}.
double normalize_rating(int score);

// Scene document IO. UTF-8 JSON; unknown fields rejected; errors carry the
// offending field path or entity id.
Scene load_scene(const std::string& text);
std::string save_scene(const Scene& scene);

// Standalone entities file ({"entities": [...]}), as produced by the
// segmentation command. Ratings default to 0.5 when absent.
std::vector<PhysicalEntity> load_entities(const std::string& text);
std::string save_entities(const std::vector<PhysicalEntity>& entities);

// Layout file {"layouts": [{element_id, position}]}, canonically ordered by
// element id. save requires the layout to cover every scene element.
std::string save_layout(const Layout& layout, const Scene& scene);
Layout load_layout(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace mrl
