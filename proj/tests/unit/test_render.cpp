#include <doctest.h>

#include "mrl/errors.hpp"
#include "mrl/scene.hpp"
#include "mrl/svg_render.hpp"

using namespace mrl;

namespace {

Scene lecture_scene() {
    return load_scene(read_file(std::string(MRL_TEST_DATA_DIR) + "/lecture_scene.json"));
}

Layout simple_layout(const Scene& s) {
    Layout layout;
    double x = -0.4;
    for (const auto& e : s.elements) {
        layout.positions[e.id] = Vec3{x, 1.0, 0.6};
        x += 0.3;
    }
    return layout;
}

std::size_t count_substr(const std::string& text, const std::string& needle) {
    std::size_t count = 0, pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        ++count;
        pos += needle.size();
    }
    return count;
}

}  // namespace

TEST_CASE("empty scene renders just the user glyph") {
    const Scene s = load_scene(R"({
        "user": {"eye": [0,0,0], "forward": [0,0,1], "up": [0,1,0]},
        "entities": [],
        "elements": []
    })");
    const std::string svg = render_svg(s, Layout{}, ViewKind::top);
    CHECK(svg.find("<circle") != std::string::npos);  // eye marker
    CHECK(svg.find("<polygon") == std::string::npos);
    CHECK(svg.rfind("</svg>\n") == svg.size() - 7);
}

TEST_CASE("same inputs give byte-identical svg") {
    const Scene s = lecture_scene();
    const Layout layout = simple_layout(s);
    CHECK(render_svg(s, layout, ViewKind::top) == render_svg(s, layout, ViewKind::top));
    CHECK(render_svg(s, layout, ViewKind::camera) == render_svg(s, layout, ViewKind::camera));
}

TEST_CASE("top view draws every entity and element") {
    const Scene s = lecture_scene();
    const Layout layout = simple_layout(s);
    const std::string svg = render_svg(s, layout, ViewKind::top);
    CHECK(count_substr(svg, "<polygon") == s.entities.size() + s.elements.size());
    for (const auto& e : s.entities) CHECK(svg.find(">" + e.label + "<") != std::string::npos);
    for (const auto& e : s.elements) CHECK(svg.find(">" + e.id + "<") != std::string::npos);
    // Ratings color the boxes on the red-green ramp.
    CHECK(svg.find("rgb(230,26,60)") != std::string::npos);   // o = 0.1 boxes
    CHECK(svg.find("rgb(77,179,60)") != std::string::npos);   // o = 0.7 desk
}

TEST_CASE("camera view projects boxes ahead of the eye") {
    const Scene s = lecture_scene();
    const Layout layout = simple_layout(s);
    const std::string svg = render_svg(s, layout, ViewKind::camera);
    CHECK(svg.find("viewBox=\"0 0 800 600\"") != std::string::npos);
    CHECK(count_substr(svg, "<polygon") >= s.elements.size());
}

TEST_CASE("render requires full layout coverage") {
    const Scene s = lecture_scene();
    Layout partial;
    partial.positions["keyboard"] = Vec3{0, 1, 0.5};
    CHECK_THROWS_AS(render_svg(s, partial, ViewKind::top), InputError);
    CHECK_THROWS_AS(view_from_name("sideways"), UsageError);
}
