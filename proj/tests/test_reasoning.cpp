#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "socratic/prompts.hpp"
#include "socratic/reasoning.hpp"
#include "test_util.hpp"

using namespace socratic;
using namespace socratic::testutil;

namespace {

std::string routing_block() { return read_file(data_dir() + "/routing_few_shot.txt"); }

const std::string kHistory =
    "10:17 AM: I am making coffee in a kitchen.\n1:46 PM: I am eating a sandwich in a kitchen.";

}  // namespace

TEST_CASE("answer_question renders the Q/A template verbatim") {
    auto scripted = std::make_shared<ScriptedCompleter>();
    std::string expected_prompt = kHistory + "\nQ: did I eat today? A:";
    scripted->script(expected_prompt, " yes, I ate a sandwich.");
    std::string got = answer_question(kHistory, Question::of("did I eat today?"), *scripted);
    CHECK(got == "yes, I ate a sandwich.");
    REQUIRE(scripted->prompts_seen.size() == 1);
    CHECK(scripted->prompts_seen[0] == expected_prompt);
    CHECK(scripted->prompts_seen[0] == prompts::question_answer(kHistory, "did I eat today?"));

    CHECK_THROWS_AS(answer_question("", Question::of("q?"), *scripted), InputError);
    auto empty = std::make_shared<ScriptedCompleter>();
    CHECK_THROWS_AS(answer_question(kHistory, Question::of("q?"), *empty), BackendError);
}

TEST_CASE("explain_answer appends the explanation clause") {
    auto scripted = std::make_shared<ScriptedCompleter>();
    std::string expected =
        kHistory + "\nQ: did I eat today? A: yes, I ate a sandwich.\nThis is because:";
    scripted->script(expected, " I was seen with a sandwich at 1:46 PM.");
    std::string got = explain_answer(kHistory, Question::of("did I eat today?"),
                                     "yes, I ate a sandwich.", *scripted);
    CHECK(got == "I was seen with a sandwich at 1:46 PM.");
    CHECK_THROWS_AS(explain_answer(kHistory, Question::of("q"), "", *scripted), InputError);
}

TEST_CASE("summarize_day uses the day-summary suffix and requires history") {
    auto lm = demo_lm();
    std::string got = summarize_day(kHistory, *lm);
    CHECK(got == "I was making coffee in a kitchen.");  // echo of the first event
    CHECK_THROWS_AS(summarize_day("  ", *lm), InputError);
}

TEST_CASE("parse_event_lines") {
    auto got = parse_event_lines("4:00 PM: I am resting.");
    REQUIRE(got.size() == 1);
    CHECK(got[0].first == 16 * 3600000);
    CHECK(got[0].second == "I am resting.");

    auto multi = parse_event_lines("noise\n11:05 AM: one thing.\nnot a stamp\n12:00 AM: another.");
    REQUIRE(multi.size() == 2);
    CHECK(multi[0].first == 11 * 3600000 + 5 * 60000);
    CHECK(multi[1].first == 0);
    CHECK(parse_event_lines("nothing here").empty());
}

TEST_CASE("forecast completes the event log and matches requested timestamps") {
    auto scripted = std::make_shared<ScriptedCompleter>();
    std::string prompt = prompts::forecast(kHistory, "3:21 PM");
    scripted->script(prompt, " I am driving a car.\n4:03 PM: I am in a park.");

    std::int64_t t1 = 15 * 3600000 + 21 * 60000;
    std::int64_t t2 = 16 * 3600000 + 3 * 60000;
    std::int64_t t3 = 17 * 3600000;

    ForecastResult r = forecast(kHistory, {t1, t2, t3}, *scripted);
    REQUIRE(r.predictions.size() == 2);
    CHECK(r.predictions[0] == std::make_pair(t1, std::string("I am driving a car.")));
    CHECK(r.predictions[1] == std::make_pair(t2, std::string("I am in a park.")));
    REQUIRE(r.missing.size() == 1);
    CHECK(r.missing[0] == t3);

    SUBCASE("no future timestamps is an error") {
        CHECK_THROWS_AS(forecast(kHistory, {}, *scripted), InputError);
    }
    SUBCASE("timestamps at or before the last event are rejected") {
        CHECK_THROWS_AS(forecast(kHistory, {13 * 3600000}, *scripted), InputError);
    }
    SUBCASE("unparseable completions carry the raw text") {
        auto garbled = std::make_shared<ScriptedCompleter>();
        garbled->set_default("\n???\n???");
        try {
            forecast(kHistory, {t1}, *garbled);
            FAIL("expected BackendError");
        } catch (const BackendError& e) {
            CHECK(std::string(e.what()).find("???") != std::string::npos);
        }
    }
    SUBCASE("mock rule completes the first slot") {
        auto lm = demo_lm();
        ForecastResult m = forecast(kHistory, {16 * 3600000}, *lm);
        REQUIRE(m.predictions.size() == 1);
        CHECK(m.predictions[0].second == "I am resting.");
    }
}

TEST_CASE("apply_correction") {
    auto lm = demo_lm();
    std::string got = apply_correction("Where am I? a tent.", "I am camping with my friends.",
                                       "It was my family, not friends.", *lm);
    CHECK(got == "I am camping with my friends. (It was my family, not friends.)");
    CHECK_THROWS_AS(apply_correction("ctx", "orig", "", *lm), InputError);
    CHECK_THROWS_AS(apply_correction("", "orig", "fix", *lm), InputError);
}

TEST_CASE("route_question: paper examples, subjectivity, totality") {
    auto lm = demo_lm();
    std::string block = routing_block();

    RoutedQuery r1 = route_question(Question::of("where did I leave my remote control"), *lm, block);
    CHECK(r1.modality == AnswerModality::image_search);
    CHECK(r1.search_entity == "remote control");

    RoutedQuery r2 =
        route_question(Question::of("what did my daughter's laugh sound like today?"), *lm, block);
    CHECK(r2.modality == AnswerModality::audio_search);
    CHECK(r2.search_entity == "daughter's laugh");

    RoutedQuery r3 = route_question(Question::of("was I happy today?"), *lm, block);
    CHECK(r3.modality == AnswerModality::text_answer);
    CHECK(r3.subjective);
    CHECK_FALSE(r3.search_entity.has_value());

    SUBCASE("unparseable routing falls back to a text answer with a warning flag") {
        auto silent = std::make_shared<ScriptedCompleter>();
        RoutedQuery fb = route_question(Question::of("anything"), *silent, block);
        CHECK(fb.modality == AnswerModality::text_answer);
        CHECK(fb.fallback);

        auto garbage = std::make_shared<ScriptedCompleter>();
        garbage->set_default("hologram | beep");
        CHECK(route_question(Question::of("anything"), *garbage, block).fallback);

        auto no_entity = std::make_shared<ScriptedCompleter>();
        no_entity->set_default("image | -");
        CHECK(route_question(Question::of("anything"), *no_entity, block).fallback);
    }
    SUBCASE("every input yields a valid routed query") {
        Rng rng(5);
        for (int i = 0; i < 50; ++i) {
            std::string q = "q" + std::to_string(rng.next_u64());
            RoutedQuery r = route_question(Question::of(q), *lm, block);
            bool search = r.modality != AnswerModality::text_answer;
            if (search) CHECK(r.search_entity.has_value());
        }
    }
}

TEST_CASE("reasoning prompts byte-match their golden files") {
    auto golden = [&](const std::string& name) { return read_file(data_dir() + "/golden/" + name); };
    CHECK(prompts::route(routing_block(), "where did I leave my remote control") ==
          golden("route_remote_control.txt"));

    WorldStateHistory log;
    auto ev = [](int h, int m, const char* text) {
        MomentSummary e;
        e.timestamp_ms = (h * 60 + m) * 60000LL;
        e.summary_text = text;
        return e;
    };
    log.events = {ev(13, 46, "I am eating a sandwich in a kitchen."),
                  ev(14, 18, "I am checking time and working on a laptop in a clean room."),
                  ev(14, 49, "I am buying produce from a grocery store or market.")};
    CHECK(prompts::forecast(render_history(log), "3:21 PM") == golden("forecast.txt"));

    CHECK(prompts::correction(
              "Where am I? outdoor cabin, campsite, outdoor inn. What do I see? fire, marshmallow, "
              "fire iron, hearth, fireside, camp chair. What am I doing? Commonsense suggests: "
              "roasting marshmallows, sitting around the fire, chatting. Most likely: sitting "
              "around the fire.",
              "I am camping and enjoying the company of my friends around the fire.",
              "It was actually my family, not friends, sitting around the fire.") ==
          golden("correction_campfire.txt"));

    WorldStateHistory day = history_load(data_dir() + "/fixtures/day_history.json");
    CHECK(prompts::explanation(render_history(day), "did I eat dinner today?",
                               "yes I ate dinner today.") == golden("explanation_dinner.txt"));
    CHECK(prompts::day_summary(render_history(day)) == golden("day_summary.txt"));
    CHECK(prompts::question_answer(render_history(day), "did I eat dinner today?") ==
          golden("question_answer_dinner.txt"));
}

TEST_CASE("execute: text, search, overrides, and errors") {
    auto world = demo_world();
    AdapterSet adapters = demo_adapters(world);
    FrameStream stream = stream_from_world(*world);
    std::string block = routing_block();

    EgoCaptioner captioner(adapters, EntityVocabulary::load(data_dir() + "/vocab/places365.txt"),
                           EntityVocabulary::load(data_dir() + "/vocab/objects600.txt"));
    WorldStateHistory history = compile_history(stream, {0, 1, 4}, captioner);

    SearchIndexes indexes;
    indexes.image_keys = build_image_keys(stream);
    indexes.audio_keys = build_audio_keys(stream, *adapters.alm);
    indexes.top_n = 2;

    SUBCASE("text answer with explanation") {
        Answer a = execute(Question::of("did I eat a sandwich today?"), stream, history, indexes,
                           adapters, block);
        CHECK(a.modality == AnswerModality::text_answer);
        CHECK(a.text == "yes, I ate a sandwich.");
        CHECK(a.explanation.has_value());
    }
    SUBCASE("audio search pinpoints the doorbell clip") {
        Answer a = execute(Question::of("did I hear a doorbell today?"), stream, history, indexes,
                           adapters, block);
        CHECK(a.modality == AnswerModality::audio_search);
        REQUIRE(a.retrieved.has_value());
        REQUIRE(!a.retrieved->empty());
        CHECK(a.retrieved->front().frame_index == 5);  // the doorbell frame
        for (std::size_t i = 1; i < a.retrieved->size(); ++i)
            CHECK((*a.retrieved)[i - 1].score >= (*a.retrieved)[i].score);
        for (const auto& r : *a.retrieved) CHECK(r.frame_index < stream.frames.size());
    }
    SUBCASE("image search pinpoints the coffee segment") {
        Answer a = execute(Question::of("when did I drink coffee?"), stream, history, indexes,
                           adapters, block);
        CHECK(a.modality == AnswerModality::image_search);
        REQUIRE(a.retrieved.has_value());
        CHECK(a.retrieved->front().frame_index == 1);
    }
    SUBCASE("audio query on a crafted laughter world") {
        auto laugh_world = std::make_shared<SyntheticWorld>(23, 128);
        laugh_world->add_frame({"l0", 0, {"kitchen"}, ""});
        laugh_world->add_frame({"l1", 1000, {"living room"}, "quiet"});
        laugh_world->add_frame({"l2", 2000, {"living room"}, "laugh"});
        laugh_world->add_frame({"l3", 3000, {"garden"}, "birds"});
        laugh_world->add_audio({"quiet", {"a ticking clock"}, ""});
        laugh_world->add_audio({"laugh", {"daughter's laugh"}, ""});
        laugh_world->add_audio({"birds", {"birds chirping"}, ""});
        AdapterSet la = demo_adapters(laugh_world);
        FrameStream ls = stream_from_world(*laugh_world);
        SearchIndexes li;
        li.audio_keys = build_audio_keys(ls, *la.alm);
        li.top_n = 1;
        WorldStateHistory tiny;
        tiny.events.push_back(MomentSummary{});
        Answer a = execute(Question::of("what did my daughter's laugh sound like today?"), ls, tiny,
                           li, la, block);
        CHECK(a.modality == AnswerModality::audio_search);
        REQUIRE(a.retrieved.has_value());
        CHECK(a.retrieved->front().frame_index == 2);
    }
    SUBCASE("text question over an empty history is an error") {
        WorldStateHistory empty;
        CHECK_THROWS_AS(execute(Question::of("did I eat a sandwich today?"), stream, empty, indexes,
                                adapters, block),
                        InputError);
    }
    SUBCASE("forced modality override is respected") {
        Question q = Question::of("did I eat a sandwich today?");
        q.requested_outputs = AnswerModality::image_search;
        Answer a = execute(q, stream, history, indexes, adapters, block);
        CHECK(a.modality == AnswerModality::image_search);
        REQUIRE(a.retrieved.has_value());
    }
    SUBCASE("missing index for the routed modality is a config error") {
        SearchIndexes none;
        CHECK_THROWS_AS(execute(Question::of("when did I drink coffee?"), stream, history, none,
                                adapters, block),
                        ConfigError);
    }
    SUBCASE("subjective questions carry a warning") {
        Answer a =
            execute(Question::of("was I happy today?"), stream, history, indexes, adapters, block);
        CHECK(std::find(a.warnings.begin(), a.warnings.end(), "subjective") != a.warnings.end());
    }
    SUBCASE("answer JSON shape") {
        Answer a = execute(Question::of("did I hear a doorbell today?"), stream, history, indexes,
                           adapters, block);
        auto j = answer_to_json(a);
        CHECK(j.at("modality") == "audio");
        CHECK(j.at("retrieved").is_array());
        CHECK(j.at("retrieved")[0].contains("t_ms"));
        CHECK(j.at("retrieved")[0].contains("score"));
    }
}
