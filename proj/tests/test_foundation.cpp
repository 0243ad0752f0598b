#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <set>

#include "socratic/http_backend.hpp"
#include "socratic/replay.hpp"
#include "socratic/smeb.hpp"
#include "test_util.hpp"

using namespace socratic;
using namespace socratic::testutil;

namespace {

Embedding emb(std::initializer_list<float> vals) {
    Vec v(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (float x : vals) v[i++] = x;
    return Embedding::raw(std::move(v));
}

}  // namespace

TEST_CASE("cosine_score basics") {
    Embedding v = emb({0.3f, -1.2f, 0.5f});
    CHECK(cosine_score(v, v) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(cosine_score(emb({1, 0}), emb({0, 1})) == doctest::Approx(0.0));
    // dot = 2 + 2 + 4 = 8, norms 3 * 3 = 9
    CHECK(cosine_score(emb({1, 2, 2}), emb({2, 1, 2})) == doctest::Approx(8.0 / 9.0).epsilon(1e-9));
    CHECK(cosine_score(emb({1, 2, 2}), emb({2, 1, 2})) ==
          cosine_score(emb({2, 1, 2}), emb({1, 2, 2})));
    CHECK(cosine_score(emb({2, 4, 4}), emb({2, 1, 2})) == doctest::Approx(8.0 / 9.0));
    CHECK_THROWS_AS(cosine_score(emb({1, 0}), emb({1, 0, 0})), InputError);
    CHECK_THROWS_AS(cosine_score(emb({0, 0}), emb({1, 0})), InputError);
}

TEST_CASE("Embedding::unit normalizes and validates") {
    Embedding e = Embedding::unit(emb({3, 4}).values);
    CHECK(e.normalized);
    CHECK(std::abs(det_norm(e.values) - 1.0) <= 1e-4);
    CHECK_THROWS_AS(Embedding::unit(Vec::Zero(4)), InputError);
    Vec bad(2);
    bad << 1.0f, std::numeric_limits<float>::quiet_NaN();
    CHECK_THROWS_AS(Embedding::unit(bad), InputError);
}

TEST_CASE("SMEB round trip with and without ids") {
    TempDir tmp("smeb");
    Rng rng(41);
    Mat m(7, 5);
    for (int r = 0; r < 7; ++r)
        for (int c = 0; c < 5; ++c) m(r, c) = static_cast<float>(rng.normal());

    SUBCASE("bare matrix") {
        smeb_write(tmp.str("a.smeb"), m);
        SmebFile f = smeb_read(tmp.str("a.smeb"));
        CHECK(f.rows.rows() == 7);
        CHECK(f.rows.cols() == 5);
        CHECK(std::memcmp(f.rows.data(), m.data(), sizeof(float) * 35) == 0);
        CHECK_FALSE(f.ids.has_value());
    }
    SUBCASE("with id sidecar") {
        std::vector<std::string> ids{"a", "b", "c", "d", "e", "f", "g"};
        smeb_write(tmp.str("b.smeb"), m, &ids);
        SmebFile f = smeb_read(tmp.str("b.smeb"));
        REQUIRE(f.ids.has_value());
        CHECK(*f.ids == ids);
    }
    SUBCASE("bad magic") {
        std::ofstream os(tmp.str("bad.smeb"), std::ios::binary);
        os << "NOPE0000000000000000";
        os.close();
        CHECK_THROWS_AS(smeb_read(tmp.str("bad.smeb")), InputError);
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(smeb_read(tmp.str("nope.smeb")), InputError); }
}

TEST_CASE("synthetic world: shared space and recoverability at zero noise") {
    auto world = demo_world();
    MockVlm vlm(world, "vlm");

    // Shared-space property.
    Embedding kitchen = vlm.embed_text("kitchen");
    CHECK(cosine_score(kitchen, vlm.embed_text("kitchen")) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(cosine_score(kitchen, vlm.embed_text("staircase")) < 1.0);

    // A frame made of one entity embeds to exactly that entity's vector.
    SyntheticWorld single(3, 128);
    single.add_frame({"solo", 0, {"kitchen"}, ""});
    CHECK(cosine_score(single.frame_embedding("solo"), single.entity_vector("kitchen")) ==
          doctest::Approx(1.0).epsilon(1e-6));

    // Members of the planted entity set outrank every non-member at noise 0.
    const auto& frame = world->frames()[1];  // kitchen / coffee maker / making coffee
    Embedding img = world->frame_embedding(frame.id);
    double worst_member = 1.0;
    for (const auto& e : frame.entities)
        worst_member = std::min(worst_member, cosine_score(img, world->entity_vector(e)));
    std::vector<std::string> outsiders{"staircase", "hamster", "wine glass", "park",
                                       "swimming pool", "guitar", "snow", "harbor"};
    for (const auto& label : outsiders)
        CHECK(cosine_score(img, world->entity_vector(label)) < worst_member);
}

TEST_CASE("synthetic world: noisy frame still prefers its entity over 1000 trials") {
    SyntheticWorld world(99, 256, 0.1f);
    for (int i = 0; i < 1000; ++i)
        world.add_frame({"n" + std::to_string(i), i, {"kitchen"}, ""});
    Embedding kitchen = world.entity_vector("kitchen");
    std::vector<Embedding> unrelated;
    for (const char* l : {"harbor", "violin", "sand dune", "traffic light", "moss"})
        unrelated.push_back(world.entity_vector(l));
    for (int i = 0; i < 1000; ++i) {
        Embedding img = world.frame_embedding("n" + std::to_string(i));
        double own = cosine_score(img, kitchen);
        for (const auto& u : unrelated) CHECK(own > cosine_score(img, u));
    }
}

TEST_CASE("mock adapters are pure functions of (inputs, seed)") {
    auto w1 = demo_world();
    auto w2 = demo_world();
    MockVlm v1(w1, "vlm"), v2(w2, "vlm");
    Embedding a = v1.embed_image(MediaRef::image("f1"));
    Embedding b = v2.embed_image(MediaRef::image("f1"));
    CHECK(std::memcmp(a.values.data(), b.values.data(), sizeof(float) * a.dim()) == 0);

    auto lm1 = demo_lm();
    auto lm2 = demo_lm();
    CompletionParams p;
    std::string prompt = "Places: kitchen. Objects: coffee maker. Activities:";
    CHECK(lm1->complete(prompt, p) == lm2->complete(prompt, p));
}

TEST_CASE("mock LM: rule table, determinism, truncation, context limit") {
    auto lm = demo_lm();
    CompletionParams p;

    std::string prompt = "Places: kitchen, hall. Objects: coffee maker, mug. Activities:";
    auto out = lm->complete(prompt, p);
    REQUIRE(out.size() == 1);
    CHECK(out[0] == "making coffee, brewing espresso, washing dishes");
    CHECK(lm->complete(prompt, p) == out);  // temperature 0 determinism

    SUBCASE("stop sequences cut the completion") {
        CompletionParams stopped = p;
        stopped.stop = {","};
        CHECK(lm->complete(prompt, stopped)[0] == "making coffee");
    }
    SUBCASE("max_tokens caps whitespace tokens") {
        CompletionParams capped = p;
        capped.max_tokens = 2;
        CHECK(trim(lm->complete(prompt, capped)[0]) == "making coffee,");
    }
    SUBCASE("empty prompt rejected") { CHECK_THROWS_AS(lm->complete("  ", p), InputError); }
    SUBCASE("prompt over the context limit reports measured size") {
        MockLm small(1, "tiny", 16);
        std::string big(64, 'x');
        try {
            small.complete(big, p);
            FAIL("expected BackendError");
        } catch (const BackendError& e) {
            CHECK(std::string(e.what()).find("64") != std::string::npos);
            CHECK(std::string(e.what()).find("16") != std::string::npos);
        }
    }
    SUBCASE("temperature sampling is seed-deterministic") {
        CompletionParams warm;
        warm.temperature = 0.9f;
        warm.sample_count = 6;
        auto w = demo_world();
        std::string cap_prompt =
            "I am an intelligent image captioning bot. This image is a photo. There are no "
            "people. I think this photo was taken at a kitchen, hallway, or attic.  I think "
            "there might be a mug, plate in this photo. A creative short caption I can generate "
            "to describe this image is:";
        auto s1 = lm->complete(cap_prompt, warm);
        auto s2 = demo_lm()->complete(cap_prompt, warm);
        CHECK(s1 == s2);
        CHECK(s1.size() == 6);
    }
}

TEST_CASE("mock sentence embedder: bag-of-token hashing") {
    MockSentenceEmbedder embedder(42);
    Embedding a = embedder.embed("the dog barked loudly");
    Embedding b = embedder.embed("the dog barked loudly");
    CHECK(cosine_score(a, b) == doctest::Approx(1.0));

    // Disjoint-token strings land on disjoint coordinates (verified), so the
    // cosine is exactly zero.
    std::string s1 = "violet morning harbor";
    std::string s2 = "gravel thunder mint";
    std::set<int> c1, c2;
    for (const auto& t : MockSentenceEmbedder::tokenize(s1)) c1.insert(embedder.token_coordinate(t));
    for (const auto& t : MockSentenceEmbedder::tokenize(s2)) c2.insert(embedder.token_coordinate(t));
    for (int c : c1) REQUIRE(c2.count(c) == 0);
    CHECK(cosine_score(embedder.embed(s1), embedder.embed(s2)) == doctest::Approx(0.0));

    CHECK_THROWS_AS(embedder.embed(""), InputError);
    CHECK_THROWS_AS(embedder.embed("  \n "), InputError);
}

TEST_CASE("media refs and adapter set requirements") {
    MediaRef audio = MediaRef::audio("clip-1");
    REQUIRE(audio.time_span_ms.has_value());
    CHECK(audio.time_span_ms->second - audio.time_span_ms->first == kDefaultAudioSpanMs);

    AdapterSet set;
    set.lm_generate = demo_lm();
    try {
        require_adapters(set, {AdapterRole::lm_generate, AdapterRole::vlm, AdapterRole::alm});
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        std::string msg = e.what();
        CHECK(msg.find("vlm") != std::string::npos);
        CHECK(msg.find("alm") != std::string::npos);
        CHECK(msg.find("lm_generate") == std::string::npos);
    }
}

TEST_CASE("mock ALM: ranking and transcription") {
    auto world = demo_world();
    MockAlm alm(world, "alm");
    MockVlm vlm(world, "vlm");
    Embedding clip = alm.embed_audio(MediaRef::audio("a1"));  // running water
    double best = cosine_score(clip, vlm.embed_text("running water"));
    for (const char* other : {"wood chopping", "a doorbell", "footsteps"})
        CHECK(best > cosine_score(clip, vlm.embed_text(other)));

    CHECK(alm.transcribe(MediaRef::audio("a1")) == "");  // silent clip
    CHECK(alm.transcribe(MediaRef::audio("a5")) ==
          world->audio("a5").transcript);  // fixture identity
    CHECK_THROWS_AS(alm.embed_audio(MediaRef::audio("missing")), InputError);
}

TEST_CASE("HTTP adapters reproduce mock behavior bit-exactly through stub servers") {
    auto world = demo_world();
    AdapterSet mock = demo_adapters(world);

    // One server per endpoint role, as with SM_LM/VLM/ALM_ENDPOINT.
    AdapterSet lm_side;
    lm_side.lm_generate = mock.lm_generate;
    lm_side.lm_embed = mock.lm_embed;
    AdapterSet vlm_side;
    vlm_side.vlm = mock.vlm;
    AdapterSet alm_side;
    alm_side.alm = mock.alm;
    ModelServer lm_server(lm_side), vlm_server(vlm_side), alm_server(alm_side);

    auto opts_for = [](ModelServer& s) {
        HttpOptions o;
        o.endpoint = "http://127.0.0.1:" + std::to_string(s.start());
        return o;
    };
    HttpOptions lm_opts = opts_for(lm_server);
    HttpTextCompleter lm(lm_opts);
    HttpSentenceEmbedder embed(lm_opts);
    HttpVlm vlm(opts_for(vlm_server));
    HttpAlm alm(opts_for(alm_server));

    CompletionParams p;
    std::string prompt = "Places: kitchen. Objects: coffee maker, mug. Activities:";
    CHECK(lm.complete(prompt, p) == mock.lm_generate->complete(prompt, p));

    auto bits_equal = [](const Embedding& a, const Embedding& b) {
        return a.dim() == b.dim() &&
               std::memcmp(a.values.data(), b.values.data(), sizeof(float) * a.dim()) == 0;
    };
    CHECK(bits_equal(vlm.embed_text("kitchen"), mock.vlm->embed_text("kitchen")));
    CHECK(bits_equal(vlm.embed_image(MediaRef::image("f1")),
                     mock.vlm->embed_image(MediaRef::image("f1"))));
    CHECK(bits_equal(alm.embed_audio(MediaRef::audio("a1")),
                     mock.alm->embed_audio(MediaRef::audio("a1"))));
    CHECK(bits_equal(embed.embed("a quick brown fox"), mock.lm_embed->embed("a quick brown fox")));
    CHECK(alm.transcribe(MediaRef::audio("a5")) == mock.alm->transcribe(MediaRef::audio("a5")));

    // Backend failures surface as BackendError, not crashes.
    CHECK_THROWS_AS(vlm.embed_image(MediaRef::image("missing-frame")), BackendError);
    lm_server.stop();
    vlm_server.stop();
    alm_server.stop();
    HttpOptions dead;
    dead.endpoint = "http://127.0.0.1:1";
    dead.timeout_ms = 200;
    CHECK_THROWS_AS(HttpTextCompleter(dead).complete(prompt, p), BackendError);
}

TEST_CASE("replay store records and replays without the fallback") {
    TempDir tmp("replay");
    auto scripted = std::make_shared<ScriptedCompleter>();
    scripted->script("ping", "pong");
    {
        ReplayStore store(tmp.str(), false);
        ReplayTextCompleter recorder(store, scripted);
        CompletionParams p;
        CHECK(recorder.complete("ping", p)[0] == "pong");
    }
    ReplayStore loaded(tmp.str());
    ReplayTextCompleter replay(loaded);
    CompletionParams p;
    CHECK(replay.complete("ping", p)[0] == "pong");
    CHECK_THROWS_AS(replay.complete("unseen", p), BackendError);

    CompletionParams other;
    other.max_tokens = 7;  // params participate in the request key
    CHECK_THROWS_AS(replay.complete("ping", other), BackendError);
}

TEST_CASE("prompt-template VLM wraps label text only") {
    auto world = demo_world();
    auto raw = std::make_shared<MockVlm>(world, "vlm");
    PromptTemplateVlm wrapped(raw, "a photo of {}");
    Embedding direct = raw->embed_text("a photo of kitchen");
    Embedding via = wrapped.embed_text("kitchen");
    CHECK(std::memcmp(direct.values.data(), via.values.data(), sizeof(float) * direct.dim()) == 0);
    // Images pass through untouched.
    Embedding img = wrapped.embed_image(MediaRef::image("f1"));
    Embedding img_direct = raw->embed_image(MediaRef::image("f1"));
    CHECK(std::memcmp(img.values.data(), img_direct.values.data(), sizeof(float) * img.dim()) == 0);
    CHECK_THROWS_AS(PromptTemplateVlm(raw, "no placeholder"), ConfigError);
}

TEST_CASE("completion params validation") {
    CompletionParams p;
    p.temperature = -0.5f;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = {};
    p.max_tokens = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
    p = {};
    p.sample_count = 0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
}
