#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "socratic/caption.hpp"
#include "socratic/prompts.hpp"
#include "test_util.hpp"

using namespace socratic;
using namespace socratic::testutil;

namespace {

EntityVocabulary places_vocab() {
    return EntityVocabulary::load(data_dir() + "/vocab/places365.txt");
}
EntityVocabulary objects_vocab() {
    return EntityVocabulary::load(data_dir() + "/vocab/objects600.txt");
}

CaptionState state_of(std::vector<std::string> places, std::vector<std::string> objects,
                      std::vector<std::string> activities) {
    CaptionState s;
    float score = 0.9f;
    for (auto& p : places) s.places.items.push_back({std::move(p), score -= 0.01f});
    for (auto& o : objects) s.objects.items.push_back({std::move(o), score -= 0.01f});
    for (auto& a : activities) s.activities.items.push_back({std::move(a), score -= 0.01f});
    return s;
}

}  // namespace

TEST_CASE("vocabulary loading validates and normalizes") {
    EntityVocabulary v = places_vocab();
    CHECK(v.size() == 365);
    CHECK_THROWS_AS(EntityVocabulary::from_labels("dup", {"Kitchen", "kitchen "}), InputError);
    CHECK_THROWS_AS(EntityVocabulary::from_labels("blank", {"a", "  "}), InputError);
    CHECK_THROWS_AS(EntityVocabulary::load(data_dir() + "/vocab/missing.txt"), InputError);
}

TEST_CASE("rank_vocabulary: synthetic oracle, permutation, ties") {
    auto world = demo_world();
    MockVlm vlm(world, "vlm");
    EntityVocabulary vocab = places_vocab();
    Embedding img = world->frame_embedding("f1");  // kitchen scene

    RankedEntities top3 = rank_vocabulary(img, vocab, vlm, 3, Category::place);
    REQUIRE(top3.items.size() == 3);
    CHECK(top3.items[0].label == "kitchen");
    for (std::size_t i = 1; i < top3.items.size(); ++i)
        CHECK(top3.items[i - 1].score >= top3.items[i].score);

    SUBCASE("top_k equal to vocab size is a permutation") {
        RankedEntities all = rank_vocabulary(img, vocab, vlm, 365, Category::place);
        std::set<std::string> got;
        for (const auto& it : all.items) got.insert(it.label);
        CHECK(got.size() == 365);
        CHECK(got == std::set<std::string>(vocab.labels.begin(), vocab.labels.end()));
    }
    SUBCASE("exact ties break lexicographically") {
        EntityVocabulary tied = EntityVocabulary::from_labels("tied", {"pear", "apple", "plum"});
        Mat rows(3, 4);
        rows.row(0) << 1, 0, 0, 0;
        rows.row(1) << 1, 0, 0, 0;  // same vector as "pear"
        rows.row(2) << 0, 1, 0, 0;
        tied.cached_text_embeddings = rows;
        Vec q(4);
        q << 1, 0, 0, 0;
        RankedEntities r = rank_vocabulary(Embedding{q, true}, tied, vlm, 3, Category::place);
        CHECK(r.items[0].label == "apple");
        CHECK(r.items[1].label == "pear");
        CHECK(r.items[0].score == r.items[1].score);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(rank_vocabulary(img, vocab, vlm, 0, Category::place), InputError);
        CHECK_THROWS_AS(rank_vocabulary(img, vocab, vlm, 366, Category::place), InputError);
        Embedding wrong{Vec::Ones(8), false};
        CHECK_THROWS_AS(rank_vocabulary(wrong, vocab, vlm, 3, Category::place), InputError);
    }
}

TEST_CASE("parse_entity_list handles separators, bullets, headers") {
    CHECK(parse_entity_list("making coffee, brewing espresso, washing dishes") ==
          std::vector<std::string>{"making coffee", "brewing espresso", "washing dishes"});
    CHECK(parse_entity_list("Activities: cooking.") == std::vector<std::string>{"cooking"});
    CHECK(parse_entity_list("- apples\n- pears\n2. plums") ==
          std::vector<std::string>{"apples", "pears", "plums"});
    CHECK(parse_entity_list("A,  a,\nA.") == std::vector<std::string>{"a"});  // dedup after normalize
    CHECK(parse_entity_list("  ,, \n") == std::vector<std::string>{});
}

TEST_CASE("generate_activities: mock rule, singleton parse, error carries raw text") {
    auto lm = demo_lm();
    CaptionState s = state_of({"kitchen"}, {"coffee maker"}, {});
    auto got = generate_activities(s.places, s.objects, *lm, CaptionConfig{});
    CHECK(got == std::vector<std::string>{"making coffee", "brewing espresso", "washing dishes"});

    SUBCASE("singleton completion") {
        auto scripted = std::make_shared<ScriptedCompleter>();
        scripted->script(prompts::activities({"kitchen"}, {"coffee maker"}), "Activities: cooking.");
        CHECK(generate_activities(s.places, s.objects, *scripted, CaptionConfig{}) ==
              std::vector<std::string>{"cooking"});
    }
    SUBCASE("empty completions raise after one retry") {
        auto empty = std::make_shared<ScriptedCompleter>();
        try {
            generate_activities(s.places, s.objects, *empty, CaptionConfig{});
            FAIL("expected BackendError");
        } catch (const BackendError& e) {
            CHECK(std::string(e.what()).find("raw") != std::string::npos);
        }
        CHECK(empty->prompts_seen.size() == 2);  // exactly one retry
    }
    SUBCASE("preconditions") {
        CaptionState none;
        CHECK_THROWS_AS(generate_activities(none.places, s.objects, *lm, CaptionConfig{}),
                        InputError);
    }
}

TEST_CASE("rerank_candidates: containment, order, top_k") {
    auto world = demo_world();
    MockVlm vlm(world, "vlm");
    Embedding img = world->frame_embedding("f6");  // chopping wood scene

    std::vector<std::string> cands{"chopping wood", "swimming", "raking leaves"};
    RankedEntities r = rerank_candidates(img, cands, vlm, 2, Category::activity);
    REQUIRE(r.items.size() == 2);
    CHECK(r.items[0].label == "chopping wood");
    std::set<std::string> in(cands.begin(), cands.end());
    for (const auto& it : r.items) CHECK(in.count(it.label) == 1);

    CHECK(rerank_candidates(img, {"solo"}, vlm, 5, Category::activity).items.size() == 1);
    CHECK(rerank_candidates(img, cands, vlm, 99, Category::activity).items.size() == 3);
    CHECK_THROWS_AS(rerank_candidates(img, {}, vlm, 3, Category::activity), InputError);
}

TEST_CASE("expand_to_equilibrium: fixed point, growth, truncation") {
    FakeVlm vlm(8);
    Vec img(8);
    img << 1, 0, 0, 0, 0, 0, 0, 0;
    auto unit_at = [&](int i) {
        Vec v = Vec::Zero(8);
        v[i] = 1.0f;
        return v;
    };
    vlm.set_text("kitchen", unit_at(0));
    vlm.set_text("coffee maker", unit_at(0));
    vlm.set_text("making coffee", unit_at(0));
    vlm.set_text("mug", unit_at(0));
    vlm.set_text("kettle", unit_at(0));
    vlm.set_text("spoon", unit_at(0));
    Embedding image{img, true};

    CaptionConfig cfg;
    cfg.equilibrium_max_rounds = 3;

    SUBCASE("LM proposing only known entities terminates in one round") {
        auto lm = std::make_shared<ScriptedCompleter>();
        CaptionState s = state_of({"kitchen"}, {"coffee maker"}, {"making coffee"});
        lm->script(prompts::activities({"kitchen"}, {"coffee maker"}), "making coffee");
        lm->script(prompts::expand_objects("making coffee"), "coffee maker");
        lm->script(prompts::expand_places("making coffee"), "kitchen");
        auto before = s.objects.items.size();
        ExpansionResult r = expand_to_equilibrium(s, *lm, vlm, image, cfg);
        CHECK(r.rounds_used == 1);
        CHECK_FALSE(r.truncated);
        CHECK(s.objects.items.size() == before);
    }
    SUBCASE("a proposal that keeps landing somewhere new flags truncation at the budget") {
        // Round 1 absorbs "alpha" into objects and places, round 2 into
        // activities; with a 2-round budget the loop is still adding when it
        // stops.
        vlm.set_text("alpha", unit_at(0));
        auto lm = std::make_shared<ScriptedCompleter>();
        CaptionState s = state_of({"kitchen"}, {"coffee maker"}, {"making coffee"});
        lm->script(prompts::activities({"kitchen"}, {"coffee maker"}), "making coffee");
        lm->set_default("alpha");
        CaptionConfig two = cfg;
        two.equilibrium_max_rounds = 2;
        ExpansionResult r = expand_to_equilibrium(s, *lm, vlm, image, two);
        CHECK(r.rounds_used == 2);
        CHECK(r.truncated);
        CHECK(s.objects.contains_normalized("alpha"));
        CHECK(s.places.contains_normalized("alpha"));
        CHECK(s.activities.contains_normalized("alpha"));
    }
    SUBCASE("the same run with a 3-round budget settles and is not truncated") {
        vlm.set_text("alpha", unit_at(0));
        auto lm = std::make_shared<ScriptedCompleter>();
        CaptionState s = state_of({"kitchen"}, {"coffee maker"}, {"making coffee"});
        lm->script(prompts::activities({"kitchen"}, {"coffee maker"}), "making coffee");
        lm->set_default("alpha");
        ExpansionResult r = expand_to_equilibrium(s, *lm, vlm, image, cfg);
        CHECK(r.rounds_used == 3);
        CHECK_FALSE(r.truncated);
    }
    SUBCASE("empty state is a precondition error") {
        CaptionState empty;
        auto lm = std::make_shared<ScriptedCompleter>();
        CHECK_THROWS_AS(expand_to_equilibrium(empty, *lm, vlm, image, cfg), InputError);
    }
}

TEST_CASE("summarize_moment and audio variant") {
    auto lm = demo_lm();
    CaptionState s = state_of({"kitchen"}, {"coffee maker"}, {"making coffee"});
    CHECK(summarize_moment(s, *lm) == "making coffee in the kitchen.");

    SUBCASE("missing activity fails before any LM call") {
        CaptionState no_act = state_of({"kitchen"}, {"coffee maker"}, {});
        auto counting = std::make_shared<ScriptedCompleter>();
        CHECK_THROWS_AS(summarize_moment(no_act, *counting), InputError);
        CHECK(counting->prompts_seen.empty());
    }
    SUBCASE("absent sound degenerates to the visual summary byte for byte") {
        CHECK(summarize_moment_with_audio(s, std::nullopt, *lm) == summarize_moment(s, *lm));
    }
    SUBCASE("sound clause inserted") {
        CaptionState stairs = state_of({"staircase"}, {"stairs"}, {"climbing"});
        std::string got =
            summarize_moment_with_audio(stairs, ScoredLabel{"footsteps", 0.7f}, *demo_lm());
        CHECK(got == "climbing in the staircase, and I may hear footsteps.");
    }
}

TEST_CASE("suggest_sounds and pick_sound") {
    auto world = demo_world();
    MockVlm vlm(world, "vlm");
    MockAlm alm(world, "alm");
    auto lm = demo_lm();

    CaptionState s = state_of({"kitchen"}, {"coffee maker"}, {"making coffee"});
    auto sounds = suggest_sounds(s, *lm, CaptionConfig{});
    REQUIRE(sounds.size() == 5);
    CHECK(sounds[0] == "running water");

    Embedding audio = alm.embed_audio(MediaRef::audio("a1"));  // running water
    ScoredLabel picked = pick_sound(audio, sounds, vlm);
    CHECK(picked.label == "running water");

    CHECK(pick_sound(audio, {"only option"}, vlm).label == "only option");
    CHECK_THROWS_AS(pick_sound(audio, {}, vlm), InputError);

    SUBCASE("n_sounds truncates the parsed list") {
        CaptionConfig two;
        two.n_sounds = 2;
        auto scripted = std::make_shared<ScriptedCompleter>();
        scripted->set_default("a, b, c, d, e, f");
        CHECK(suggest_sounds(s, *scripted, two).size() == 2);
    }
}

TEST_CASE("prompt renderers byte-match the golden files") {
    auto golden = [&](const std::string& name) { return read_file(data_dir() + "/golden/" + name); };

    CHECK(prompts::activities({"nursing home", "landfill", "living room"},
                              {"wine", "wine glass", "woman"}) == golden("activities_wine.txt"));
    CHECK(prompts::moment_summary({"nursing home", "landfill", "living room"},
                                  {"wine", "wine glass", "woman"},
                                  "drinking wine") == golden("moment_summary_wine.txt"));
    CHECK(prompts::expand_objects("making pancakes") == golden("expand_objects_pancakes.txt"));
    CHECK(prompts::possible_sounds({"staircase"},
                                   {"stairs", "animal", "mammal", "hamster", "human leg"},
                                   {"climbing"}, 5) == golden("possible_sounds_staircase.txt"));
    CHECK(prompts::moment_summary_with_audio(
              {"staircase"}, {"stairs", "animal", "mammal", "hamster", "human leg"}, "footsteps",
              "climbing") == golden("moment_summary_audio_staircase.txt"));
    CHECK(prompts::internet_caption(
              "photo", "are no people",
              {"indoor bow window", "dining room", "interior balcony"},
              {"double-hung window", "casement window", "sliding window", "pivoting window",
               "breakfast area", "breakfast nook", "dining area", "storm window", "storm sash",
               "dining room", "bay window", "bow window", "lancet window"}) ==
          golden("internet_caption_dining_room.txt"));
    std::string transcript =
        "today we are making a simple tomato pasta, start by boiling the water, salt it well, and "
        "while that heats up chop the garlic and onions";
    CHECK(prompts::transcript_summary(transcript) == golden("transcript_summary.txt"));
}

TEST_CASE("caption_internet_image") {
    auto world = demo_world();
    MockVlm vlm(world, "vlm");
    auto lm = demo_lm();

    InternetVocabs vocabs{places_vocab(), objects_vocab(),
                          EntityVocabulary::load(data_dir() + "/vocab/image_types.txt"),
                          EntityVocabulary::load(data_dir() + "/vocab/people_counts.txt")};
    Embedding img = world->frame_embedding("f4");  // sandwich scene

    SUBCASE("single candidate at temperature zero is returned as-is") {
        CaptionConfig cfg = CaptionConfig::internet();
        cfg.caption_candidates = 1;
        cfg.caption_temperature = 0.0f;
        auto r = caption_internet_image(img, vocabs, *lm, vlm, cfg);
        REQUIRE(r.candidates.size() == 1);
        CHECK(r.caption == r.candidates[0].label);
        CHECK(r.objects.items.size() == 10);
    }
    SUBCASE("a candidate matching the frame's content wins the re-rank") {
        SyntheticWorld::FrameSpec spec;
        spec.id = "cap-frame";
        std::string winner = "A quiet kitchen with a sandwich on the counter.";
        auto crafted = std::make_shared<SyntheticWorld>(7, 256);
        crafted->add_frame({"cap-frame", 0, {"kitchen", "sandwich", winner}, ""});
        MockVlm cvlm(crafted, "vlm");
        auto scripted = std::make_shared<ScriptedCompleter>();
        scripted->set_default("whatever");
        CaptionConfig cfg = CaptionConfig::internet();
        cfg.caption_candidates = 3;
        Embedding cimg = crafted->frame_embedding("cap-frame");
        // Build the prompt the pipeline will render, then script candidates.
        auto probe = caption_internet_image(cimg, vocabs, *scripted, cvlm, cfg);
        (void)probe;
        REQUIRE(scripted->prompts_seen.size() >= 1);
        std::string prompt = scripted->prompts_seen.back();
        scripted->script_list(prompt, {"A dull unrelated line.", winner, "Another filler."});
        auto r = caption_internet_image(cimg, vocabs, *scripted, cvlm, cfg);
        CHECK(r.caption == winner);
        CHECK(r.candidates.size() == 3);
        for (std::size_t i = 1; i < r.candidates.size(); ++i)
            CHECK(r.candidates[i - 1].score >= r.candidates[i].score);
    }
    SUBCASE("fixed vocabularies are validated verbatim") {
        InternetVocabs bad = vocabs;
        bad.image_types = EntityVocabulary::from_labels("t", {"photo", "cartoon", "sketch"});
        CHECK_THROWS_AS(caption_internet_image(img, bad, *lm, vlm, CaptionConfig::internet()),
                        ConfigError);
        InternetVocabs bad2 = vocabs;
        bad2.people_counts = EntityVocabulary::from_labels("p", {"no people", "one person"});
        CHECK_THROWS_AS(caption_internet_image(img, bad2, *lm, vlm, CaptionConfig::internet()),
                        ConfigError);
    }
    SUBCASE("empty candidates raise after retry") {
        auto empty = std::make_shared<ScriptedCompleter>();
        CHECK_THROWS_AS(caption_internet_image(img, vocabs, *empty, vlm, CaptionConfig::internet()),
                        BackendError);
    }
    SUBCASE("output JSON shape") {
        CaptionConfig cfg = CaptionConfig::internet();
        cfg.caption_candidates = 2;
        auto j = internet_caption_json(caption_internet_image(img, vocabs, *lm, vlm, cfg));
        CHECK(j.contains("caption"));
        CHECK(j.at("candidates").is_array());
        CHECK(j.at("detections").contains("places"));
        CHECK(j.at("detections").contains("image_type"));
    }
}

TEST_CASE("EgoCaptioner end to end on the demo world") {
    auto world = demo_world();
    AdapterSet adapters = demo_adapters(world);
    EgoCaptioner captioner(adapters, places_vocab(), objects_vocab());

    const auto& f1 = world->frames()[1];
    MomentSummary m = captioner.summarize_frame(world->frame_embedding(f1.id),
                                                MediaRef::audio(f1.audio_id), f1.t_ms);
    CHECK(m.summary_text == "I am making coffee in the kitchen, and I may hear running water.");
    REQUIRE(m.sound.has_value());
    CHECK(m.sound->label == "running water");
    CHECK(m.places.items[0].label == "kitchen");
    CHECK(m.activities.items[0].label == "making coffee");

    // Missing required adapter fails before work starts.
    AdapterSet no_vlm;
    no_vlm.lm_generate = adapters.lm_generate;
    CHECK_THROWS_AS(EgoCaptioner(no_vlm, places_vocab(), objects_vocab()), ConfigError);
}
