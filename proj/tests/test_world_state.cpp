#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "socratic/world_state.hpp"
#include "socratic/prompts.hpp"
#include "test_util.hpp"

using namespace socratic;
using namespace socratic::testutil;

namespace {

FrameStream stream_at(const std::vector<std::int64_t>& times) {
    FrameStream s;
    for (std::size_t i = 0; i < times.size(); ++i) {
        Frame f;
        f.t_ms = times[i];
        Vec v = Vec::Zero(4);
        v[static_cast<Eigen::Index>(i % 4)] = 1.0f;
        f.image = Embedding{std::move(v), true};
        s.frames.push_back(std::move(f));
    }
    return s;
}

MomentSummary event(std::int64_t t, std::string text) {
    MomentSummary e;
    e.timestamp_ms = t;
    e.summary_text = std::move(text);
    return e;
}

}  // namespace

TEST_CASE("frame stream validation and JSONL round trip") {
    CHECK_THROWS_AS(FrameStream{}.validate(), InputError);
    FrameStream bad = stream_at({0, 10, 10});
    CHECK_THROWS_AS(bad.validate(), InputError);

    TempDir tmp("frames");
    FrameStream s = stream_at({0, 500, 900});
    s.frames[1].audio = MediaRef::audio("clip");
    s.to_jsonl(tmp.str("f.jsonl"));
    FrameStream back = FrameStream::from_jsonl(tmp.str("f.jsonl"));
    REQUIRE(back.frames.size() == 3);
    CHECK(back.frames[1].audio->locator == "clip");
    CHECK(back.frames[2].t_ms == 900);
    CHECK(std::memcmp(back.frames[0].image.values.data(), s.frames[0].image.values.data(),
                      sizeof(float) * 4) == 0);
}

TEST_CASE("select_uniform grid walk") {
    CHECK(select_uniform(stream_at({0, 10000, 20000}), 10000) ==
          std::vector<std::size_t>{0, 1, 2});
    CHECK(select_uniform(stream_at({0, 10000, 20000}), 60000) == std::vector<std::size_t>{0});
    // grid 0, 5000, 10000 -> frames at 0, 9000, 13000
    CHECK(select_uniform(stream_at({0, 4000, 9000, 13000}), 5000) ==
          std::vector<std::size_t>{0, 2, 3});
    CHECK_THROWS_AS(select_uniform(stream_at({0, 1}), 0), InputError);

    // Property: sorted, duplicate-free, and each pick is the first frame at or
    // after its grid point.
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::int64_t> times;
        std::int64_t t = static_cast<std::int64_t>(rng.below(1000));
        int n = 1 + static_cast<int>(rng.below(40));
        for (int i = 0; i < n; ++i) {
            times.push_back(t);
            t += 1 + static_cast<std::int64_t>(rng.below(5000));
        }
        std::int64_t interval = 1 + static_cast<std::int64_t>(rng.below(8000));
        FrameStream s = stream_at(times);
        auto got = select_uniform(s, interval);
        REQUIRE(!got.empty());
        CHECK(got.front() == 0);
        for (std::size_t i = 1; i < got.size(); ++i) CHECK(got[i - 1] < got[i]);
        // Independent re-derivation of the grid walk.
        std::vector<std::size_t> expect;
        for (std::int64_t g = times.front(); g <= times.back(); g += interval) {
            std::size_t pick = 0;
            while (times[pick] < g) ++pick;
            if (expect.empty() || expect.back() != pick) expect.push_back(pick);
        }
        CHECK(got == expect);
    }
}

TEST_CASE("select_by_search finds planted segment peaks") {
    auto world = std::make_shared<SyntheticWorld>(17, 128);
    // One "drink coffee" segment (frame 2 strongest) and one "folding laundry"
    // segment at frame 5.
    world->add_frame({"s0", 0, {"bedroom"}, ""});
    world->add_frame({"s1", 1000, {"kitchen", "drink coffee"}, ""});
    world->add_frame({"s2", 2000, {"drink coffee"}, ""});
    world->add_frame({"s3", 3000, {"hallway"}, ""});
    world->add_frame({"s4", 4000, {"bedroom"}, ""});
    world->add_frame({"s5", 5000, {"folding laundry"}, ""});
    world->add_frame({"s6", 6000, {"garden"}, ""});
    FrameStream stream = stream_from_world(*world);
    MockVlm vlm(world, "vlm");
    KeyMatrix keys = build_image_keys(stream);

    auto got = select_by_search(stream, {"drink coffee"}, SearchModality::image, 1, keys, vlm);
    CHECK(got == std::vector<std::size_t>{2});

    SUBCASE("two entities hit disjoint segments, result time-sorted") {
        auto both = select_by_search(stream, {"folding laundry", "drink coffee"},
                                     SearchModality::image, 1, keys, vlm);
        CHECK(both == std::vector<std::size_t>{2, 5});
    }
    SUBCASE("an absent entity still returns peaks") {
        auto miss = select_by_search(stream, {"scuba diving"}, SearchModality::image, 1, keys, vlm);
        CHECK(miss.size() == 1);
    }
    SUBCASE("index length mismatch is an error") {
        Mat rows = Mat::Ones(3, 128);
        KeyMatrix small = KeyMatrix::from_rows(rows);
        CHECK_THROWS_AS(
            select_by_search(stream, {"drink coffee"}, SearchModality::image, 1, small, vlm),
            InputError);
    }
}

TEST_CASE("compile_history preserves order and attaches frame indices to failures") {
    auto world = demo_world();
    AdapterSet adapters = demo_adapters(world);
    EgoCaptioner captioner(adapters, EntityVocabulary::load(data_dir() + "/vocab/places365.txt"),
                           EntityVocabulary::load(data_dir() + "/vocab/objects600.txt"));
    FrameStream stream = stream_from_world(*world);

    CHECK_THROWS_AS(compile_history(stream, {}, captioner), InputError);
    CHECK_THROWS_AS(compile_history(stream, {2, 1}, captioner), InputError);
    CHECK_THROWS_AS(compile_history(stream, {99}, captioner), InputError);

    WorldStateHistory one = compile_history(stream, {1}, captioner);
    CHECK(one.events.size() == 1);

    WorldStateHistory three = compile_history(stream, {0, 1, 4}, captioner);
    REQUIRE(three.events.size() == 3);
    CHECK(three.events[0].timestamp_ms == stream.frames[0].t_ms);
    CHECK(three.events[1].timestamp_ms == stream.frames[1].t_ms);
    CHECK(three.events[2].timestamp_ms == stream.frames[4].t_ms);
    // Events equal the captioner's own outputs.
    MomentSummary direct = captioner.summarize_frame(stream.frames[4].image,
                                                     stream.frames[4].audio,
                                                     stream.frames[4].t_ms);
    CHECK(three.events[2].summary_text == direct.summary_text);

    SUBCASE("pipeline failures carry the frame index") {
        AdapterSet broken = adapters;
        broken.lm_generate = std::make_shared<MockLm>(1, "empty-rules");
        EgoCaptioner failing(broken, EntityVocabulary::load(data_dir() + "/vocab/places365.txt"),
                             EntityVocabulary::load(data_dir() + "/vocab/objects600.txt"));
        try {
            compile_history(stream, {0, 3}, failing);
            FAIL("expected BackendError");
        } catch (const BackendError& e) {
            CHECK(std::string(e.what()).find("frame 0") != std::string::npos);
        }
    }
}

TEST_CASE("render_history clock format") {
    WorldStateHistory h;
    h.events = {event(13 * 3600000 + 46 * 60000, "I am eating a sandwich in a kitchen.")};
    CHECK(render_history(h) == "1:46 PM: I am eating a sandwich in a kitchen.");

    h.events = {event(0, "I am asleep.")};
    CHECK(render_history(h) == "12:00 AM: I am asleep.");

    h.events = {event(0, "I am asleep."), event(12 * 3600000, "I am eating lunch.")};
    CHECK(render_history(h) == "12:00 AM: I am asleep.\n12:00 PM: I am eating lunch.");
    CHECK(render_history(h, ClockFormat::twenty_four_hour) ==
          "0:00: I am asleep.\n12:00: I am eating lunch.");

    CHECK_THROWS_AS(render_history(WorldStateHistory{}), InputError);

    SUBCASE("distinct minute-level histories render distinctly") {
        WorldStateHistory a, b;
        a.events = {event(60000, "x")};
        b.events = {event(120000, "x")};
        CHECK(render_history(a) != render_history(b));
        b.events = {event(60000, "y")};
        CHECK(render_history(a) != render_history(b));
    }
}

TEST_CASE("recursive_summarize condenses to the budget") {
    auto lm = demo_lm();

    WorldStateHistory h;
    for (int i = 0; i < 8; ++i)
        h.events.push_back(event(i * 3600000, "I am doing thing number " + std::to_string(i) + "."));

    SUBCASE("already under budget returns the identical history") {
        RecursiveSummaryConfig cfg;
        cfg.context_budget_chars = 100000;
        WorldStateHistory out = recursive_summarize(h, *lm, cfg);
        CHECK(history_to_json(out) == history_to_json(h));
    }
    SUBCASE("8 events with chunk 4 condense to 2 synthetic events") {
        RecursiveSummaryConfig cfg;
        cfg.chunk_size = 4;
        cfg.context_budget_chars = 120;
        WorldStateHistory out = recursive_summarize(h, *lm, cfg);
        CHECK(out.events.size() <= 2);
        CHECK(render_history(out).size() <= cfg.context_budget_chars);
        for (const auto& e : out.events) CHECK(e.origin == "condensed");
        CHECK(out.events[0].timestamp_ms == h.events[0].timestamp_ms);
    }
    SUBCASE("a single event larger than the budget is irreducible") {
        WorldStateHistory big;
        big.events = {event(0, std::string(500, 'x'))};
        RecursiveSummaryConfig cfg;
        cfg.context_budget_chars = 40;
        CHECK_THROWS_AS(recursive_summarize(big, *lm, cfg), InputError);
    }
    SUBCASE("event count strictly decreases whenever anything changes") {
        RecursiveSummaryConfig cfg;
        cfg.chunk_size = 3;
        cfg.context_budget_chars = 200;
        WorldStateHistory out = recursive_summarize(h, *lm, cfg);
        CHECK(out.events.size() < h.events.size());
    }
}

TEST_CASE("chunk summary prompt byte-matches its golden file") {
    WorldStateHistory chunk;
    MomentSummary a, b;
    a.timestamp_ms = 9 * 3600000;
    a.summary_text = "I am making coffee in a kitchen.";
    b.timestamp_ms = 9 * 3600000 + 30 * 60000;
    b.summary_text = "I am watching TV in a living room.";
    chunk.events = {a, b};
    CHECK(prompts::chunk_summary(render_history(chunk)) ==
          read_file(data_dir() + "/golden/chunk_summary.txt"));
}

TEST_CASE("event-log JSON round-trips losslessly") {
    auto world = demo_world();
    AdapterSet adapters = demo_adapters(world);
    EgoCaptioner captioner(adapters, EntityVocabulary::load(data_dir() + "/vocab/places365.txt"),
                           EntityVocabulary::load(data_dir() + "/vocab/objects600.txt"));
    FrameStream stream = stream_from_world(*world);
    WorldStateHistory h = compile_history(stream, {0, 1, 5}, captioner, HistorySource::search);
    h.search_entities = std::vector<std::string>{"drink coffee"};

    nlohmann::json j = history_to_json(h);
    WorldStateHistory back = history_from_json(j);
    CHECK(history_to_json(back) == j);
    CHECK(back.source == HistorySource::search);
    REQUIRE(back.events[1].sound.has_value());
    CHECK(back.events[1].sound->label == h.events[1].sound->label);

    TempDir tmp("histjson");
    history_save(h, tmp.str("h.json"));
    CHECK(history_to_json(history_load(tmp.str("h.json"))) == j);
}
