#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "iqa/detection.hpp"

namespace fs = std::filesystem;
using namespace iqa;
using nlohmann::json;

namespace {

DetectionSet make_set(const std::string& detector, Perspective p, RenderMode m,
                      std::vector<DetectionRecord> records) {
    DetectionSet s;
    s.detector = detector;
    s.perspective = p;
    s.render_mode = m;
    s.records = std::move(records);
    return s;
}

DetectionRecord conf(const std::string& label, double c) {
    return {label, c, std::nullopt};
}

DetectionRecord below(const std::string& label, double t) {
    return {label, std::nullopt, t};
}

const DeltaRow& row_for(const DeltaTable& t, const std::string& label) {
    for (const DeltaRow& r : t.rows) {
        if (r.label == label) return r;
    }
    REQUIRE(false);
    return t.rows.front();
}

}  // namespace

TEST_CASE("load_detections parses the documented schema") {
    const std::string path = (fs::temp_directory_path() / "iqa_det.json").string();
    {
        std::ofstream out(path);
        out << R"({"detector":"YOLO","perspective":"close_up","render_mode":"real_time",
                   "detections":[{"class":"Person","confidence":0.71},
                                 {"class":"Car","confidence":0.82}]})";
    }
    const DetectionSet s = load_detections(path);
    CHECK(s.detector == "YOLO");
    CHECK(s.perspective == Perspective::close_up);
    CHECK(s.render_mode == RenderMode::real_time);
    REQUIRE(s.records.size() == 2);
    CHECK(s.records[0].label == "Person");
    CHECK(*s.records[0].confidence == 0.71);
    fs::remove(path);
}

TEST_CASE("parse_detections edge cases") {
    const json empty = {{"detector", "D"},
                        {"perspective", "long_distance"},
                        {"render_mode", "offline"},
                        {"detections", json::array()}};
    CHECK(parse_detections(empty).records.empty());

    json bad = empty;
    bad["detections"] = json::array({{{"class", "Car"}, {"confidence", 1.5}}});
    CHECK_THROWS_WITH(parse_detections(bad), doctest::Contains("outside [0,1]"));

    bad["detections"] = json::array({{{"class", "Car"}}});
    CHECK_THROWS_WITH(parse_detections(bad), doctest::Contains("exactly one"));

    bad["detections"] =
        json::array({{{"class", "Car"}, {"confidence", 0.5}, {"below_threshold", 0.25}}});
    CHECK_THROWS_WITH(parse_detections(bad), doctest::Contains("exactly one"));

    bad = empty;
    bad["perspective"] = "sideways";
    CHECK_THROWS_WITH(parse_detections(bad), doctest::Contains("perspective"));

    CHECK_THROWS_AS(load_detections("/nonexistent/iqa.json"), std::runtime_error);
}

TEST_CASE("delta table reproduces the YOLO close-up numbers") {
    const auto rt = make_set("YOLO", Perspective::close_up, RenderMode::real_time,
                             {conf("Person", 0.71), conf("Car", 0.82)});
    const auto off = make_set("YOLO", Perspective::close_up, RenderMode::offline,
                              {conf("Person", 0.885), conf("Car", 0.72)});
    const DeltaTable t = confidence_delta_table(rt, off);
    REQUIRE(t.rows.size() == 2);

    const DeltaRow& person = row_for(t, "Person");
    CHECK(person.delta.kind == DeltaCell::Kind::value);
    CHECK(person.delta.pp == doctest::Approx(17.5).epsilon(1e-12));
    const DeltaRow& car = row_for(t, "Car");
    CHECK(car.delta.pp == doctest::Approx(-10.0).epsilon(1e-12));

    const std::string csv = render_detection_csv(t);
    CHECK(csv == "class,rt,off,delta\nCar,82.0,72.0,-10.0\nPerson,71.0,88.5,17.5\n");
}

TEST_CASE("below-threshold markers become bounds, not numbers") {
    const auto rt = make_set("YOLO", Perspective::long_distance, RenderMode::real_time,
                             {below("Person", 0.25), below("Car", 0.25)});
    const auto off = make_set("YOLO", Perspective::long_distance, RenderMode::offline,
                              {conf("Person", 0.42), conf("Car", 0.34)});
    const DeltaTable t = confidence_delta_table(rt, off);

    const DeltaRow& person = row_for(t, "Person");
    CHECK(person.rt.kind == ConfidenceCell::Kind::below_threshold);
    CHECK(person.delta.kind == DeltaCell::Kind::lower_bound);
    CHECK(person.delta.pp == doctest::Approx(17.0).epsilon(1e-12));

    const std::string csv = render_detection_csv(t);
    CHECK(csv.find("Person,<25.0,42.0,>17.0") != std::string::npos);
    CHECK(csv.find("Car,<25.0,34.0,>9.0") != std::string::npos);

    // Reversed direction: offline below threshold caps the delta from above.
    const DeltaTable rev = confidence_delta_table(off, rt);
    CHECK(row_for(rev, "Person").delta.kind == DeltaCell::Kind::upper_bound);
    CHECK(render_detection_csv(rev).find("Person,42.0,<25.0,<-17.0") != std::string::npos);
}

TEST_CASE("identical sets give zero deltas; swapping negates") {
    const auto a = make_set("Detectron2", Perspective::close_up, RenderMode::real_time,
                            {conf("Person", 1.0), conf("Car", 0.99)});
    const DeltaTable self = confidence_delta_table(a, a);
    for (const DeltaRow& r : self.rows) {
        CHECK(r.delta.kind == DeltaCell::Kind::value);
        CHECK(r.delta.pp == 0.0);
    }

    const auto b = make_set("Detectron2", Perspective::close_up, RenderMode::offline,
                            {conf("Person", 1.0), conf("Car", 0.98)});
    const DeltaTable fwd = confidence_delta_table(a, b);
    const DeltaTable bwd = confidence_delta_table(b, a);
    for (const DeltaRow& r : fwd.rows) {
        CHECK(r.delta.pp == -row_for(bwd, r.label).delta.pp);
    }
}

TEST_CASE("class union with missing markers") {
    const auto rt = make_set("D", Perspective::close_up, RenderMode::real_time,
                             {conf("Person", 0.5)});
    const auto off = make_set("D", Perspective::close_up, RenderMode::offline,
                              {conf("Car", 0.6)});
    const DeltaTable t = confidence_delta_table(rt, off);
    REQUIRE(t.rows.size() == 2);
    CHECK(row_for(t, "Person").off.kind == ConfidenceCell::Kind::missing);
    CHECK(row_for(t, "Person").delta.kind == DeltaCell::Kind::unknown);
    CHECK(row_for(t, "Car").rt.kind == ConfidenceCell::Kind::missing);
    const std::string csv = render_detection_csv(t);
    CHECK(csv.find("Car,missing,60.0,n/a") != std::string::npos);
}

TEST_CASE("multi-instance classes collapse to the maximum confidence") {
    const auto rt = make_set("D", Perspective::close_up, RenderMode::real_time,
                             {conf("Person", 0.5), conf("Person", 0.7), below("Person", 0.25)});
    const auto off = make_set("D", Perspective::close_up, RenderMode::offline,
                              {conf("Person", 0.9)});
    const DeltaTable t = confidence_delta_table(rt, off);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].rt.percent == doctest::Approx(70.0).epsilon(1e-12));
    CHECK(t.rows[0].delta.pp == doctest::Approx(20.0).epsilon(1e-12));

    // Full record list survives in the JSON rendering.
    const json j = render_detection_json(t, rt, off);
    CHECK(j["inputs"]["real_time"]["detections"].size() == 3);
}

TEST_CASE("detector and perspective mismatches are rejected") {
    const auto a = make_set("YOLO", Perspective::close_up, RenderMode::real_time,
                            {conf("Person", 0.5)});
    const auto b = make_set("Detectron2", Perspective::close_up, RenderMode::offline,
                            {conf("Person", 0.5)});
    CHECK_THROWS_WITH(confidence_delta_table(a, b), doctest::Contains("detector"));

    const auto c = make_set("YOLO", Perspective::long_distance, RenderMode::offline,
                            {conf("Person", 0.5)});
    CHECK_THROWS_WITH(confidence_delta_table(a, c), doctest::Contains("perspective"));
}

TEST_CASE("text rendering is aligned and labeled") {
    const auto rt = make_set("YOLO", Perspective::close_up, RenderMode::real_time,
                             {conf("Person", 0.71), conf("Car", 0.82)});
    const auto off = make_set("YOLO", Perspective::close_up, RenderMode::offline,
                              {conf("Person", 0.885), conf("Car", 0.72)});
    const std::string text = render_detection_text(confidence_delta_table(rt, off));
    CHECK(text.find("YOLO / close_up") != std::string::npos);
    CHECK(text.find("real-time") != std::string::npos);
    CHECK(text.find("+17.5") != std::string::npos);
    CHECK(text.find("-10.0") != std::string::npos);
}
