// Regenerates the golden prompt files and the replay fixture set under data/.
// Fixtures are recorded by running the real pipeline operations against a
// scripted completer behind a recording replay store, so the stored request
// keys always match what the operations send at runtime.
//
// Usage: gen_replay_fixtures <data-dir>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>

#include "socratic/caption.hpp"
#include "socratic/prompts.hpp"
#include "socratic/reasoning.hpp"
#include "socratic/replay.hpp"
#include "socratic/world_state.hpp"

using namespace socratic;
namespace fs = std::filesystem;

namespace {

class ScriptedCompleter final : public TextCompleter {
public:
    void script(std::string prompt, std::string response) {
        responses_[std::move(prompt)] = {std::move(response)};
    }
    void script_list(std::string prompt, std::vector<std::string> responses) {
        responses_[std::move(prompt)] = std::move(responses);
    }

    std::vector<std::string> complete(const std::string& prompt,
                                      const CompletionParams& params) const override {
        auto it = responses_.find(prompt);
        if (it == responses_.end())
            throw std::runtime_error("no scripted response for prompt:\n---\n" + prompt + "\n---");
        std::vector<std::string> out;
        for (int i = 0; i < params.sample_count; ++i)
            out.push_back(it->second[static_cast<std::size_t>(i) % it->second.size()]);
        return out;
    }
    std::string id() const override { return "scripted"; }

private:
    std::map<std::string, std::vector<std::string>> responses_;
};

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::trunc | std::ios::binary);
    os << content;
    if (!os) throw std::runtime_error("failed to write " + path.string());
    std::cout << "wrote " << path.string() << "\n";
}

RankedEntities ranked(Category c, std::vector<std::string> labels) {
    RankedEntities r{c, {}};
    float score = 0.9f;
    for (auto& l : labels) {
        r.items.push_back({std::move(l), score});
        score -= 0.05f;
    }
    return r;
}

MomentSummary event(std::int64_t t_ms, std::string text) {
    MomentSummary e;
    e.timestamp_ms = t_ms;
    e.summary_text = std::move(text);
    return e;
}

constexpr std::int64_t kMinute = 60000;
std::int64_t at(int h24, int m) { return (h24 * 60 + m) * kMinute; }

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: gen_replay_fixtures <data-dir>\n";
        return 2;
    }
    fs::path data(argv[1]);
    fs::path golden = data / "golden";
    fs::path replay_dir = data / "fixtures" / "replay";
    fs::create_directories(golden);
    fs::remove_all(replay_dir);
    fs::create_directories(replay_dir);

    auto scripted = std::make_shared<ScriptedCompleter>();
    ReplayStore store(replay_dir.string(), /*load_existing=*/false);
    ReplayTextCompleter lm(store, scripted);

    // --- Egocentric image summary (wine) -------------------------------------
    CaptionState wine;
    wine.places = ranked(Category::place, {"nursing home", "landfill", "living room"});
    wine.objects = ranked(Category::object, {"wine", "wine glass", "woman"});
    wine.activities = ranked(Category::activity, {"drinking wine"});

    std::string wine_activities_prompt =
        prompts::activities(wine.places.labels(), wine.objects.labels());
    write_file(golden / "activities_wine.txt", wine_activities_prompt);
    scripted->script(wine_activities_prompt, "drinking wine, pouring a drink, visiting with a friend");
    generate_activities(wine.places, wine.objects, lm, CaptionConfig{});

    std::string wine_summary_prompt = prompts::moment_summary(
        wine.places.labels(), wine.objects.labels(), wine.activities.items[0].label);
    write_file(golden / "moment_summary_wine.txt", wine_summary_prompt);
    scripted->script(wine_summary_prompt, "enjoying a glass of wine with a friend or loved one.");
    summarize_moment(wine, lm);

    // --- Entity expansion (pancakes) ------------------------------------------
    std::string pancakes_prompt = prompts::expand_objects("making pancakes");
    write_file(golden / "expand_objects_pancakes.txt", pancakes_prompt);
    scripted->script(pancakes_prompt,
                     "a frying pan, a spatula, a bowl, milk, eggs, flour, sugar, baking powder, "
                     "butter, a plate, syrup.");
    {
        CompletionParams p;
        p.max_tokens = 64;
        lm.complete(pancakes_prompt, p);
    }

    // --- Audio-aided summary (staircase) ---------------------------------------
    CaptionState staircase;
    staircase.places = ranked(Category::place, {"staircase"});
    staircase.objects =
        ranked(Category::object, {"stairs", "animal", "mammal", "hamster", "human leg"});
    staircase.activities = ranked(Category::activity, {"climbing"});

    std::string sounds_prompt = prompts::possible_sounds(
        staircase.places.labels(), staircase.objects.labels(), staircase.activities.labels(), 5);
    write_file(golden / "possible_sounds_staircase.txt", sounds_prompt);
    scripted->script(sounds_prompt,
                     "footsteps, creaking stairs, someone calling your name, a dog barking, a "
                     "centipede crawling.");
    suggest_sounds(staircase, lm, CaptionConfig{});

    std::string audio_summary_prompt = prompts::moment_summary_with_audio(
        staircase.places.labels(), staircase.objects.labels(), "footsteps",
        staircase.activities.items[0].label);
    write_file(golden / "moment_summary_audio_staircase.txt", audio_summary_prompt);
    scripted->script(audio_summary_prompt, "climbing a staircase, and I may hear footsteps.");
    summarize_moment_with_audio(staircase, ScoredLabel{"footsteps", 0.8f}, lm);

    // --- Internet image caption (dining room) -----------------------------------
    std::string caption_prompt = prompts::internet_caption(
        "photo", "are no people", {"indoor bow window", "dining room", "interior balcony"},
        {"double-hung window", "casement window", "sliding window", "pivoting window",
         "breakfast area", "breakfast nook", "dining area", "storm window", "storm sash",
         "dining room", "bay window", "bow window", "lancet window"});
    write_file(golden / "internet_caption_dining_room.txt", caption_prompt);
    // The recorded choice set; the selected caption is the VLM argmax downstream.
    scripted->script_list(
        caption_prompt,
        {"Looking through the window to a beautiful view.",
         "This serene and stately room is centered around a beautiful window, which floods the "
         "space with natural light. The double-hung window allows for ventilation, while the "
         "storm sash protects against inclement weather. The perfect spot for a lazy Sunday "
         "brunch or an intimate dinner party.",
         "This image shows an inviting dining space with plenty of natural light."});
    {
        CompletionParams p;
        p.temperature = 0.9f;
        p.sample_count = 3;
        p.max_tokens = 96;
        p.stop = {"\n"};
        lm.complete(caption_prompt, p);
    }

    // --- Day history and open-ended Q&A -----------------------------------------
    WorldStateHistory day;
    day.events = {
        event(at(7, 2), "I am sleeping in a bed."),
        event(at(10, 17), "I am making coffee in a kitchen."),
        event(at(11, 38), "I am watching TV in a living room."),
        event(at(12, 50), "I am doing laundry in a laundry room."),
        event(at(15, 24), "I am receiving a package at a front porch."),
        event(at(16, 10), "I am bench pressing in a home gym."),
        event(at(16, 45), "I am taking a shower in a bathroom."),
        event(at(17, 27), "I am eating a sandwich in a kitchen."),
        event(at(18, 30), "I am working on a computer in a home office."),
        event(at(20, 5), "I am drinking wine in a living room."),
    };
    history_save(day, (data / "fixtures" / "day_history.json").string());
    std::cout << "wrote " << (data / "fixtures" / "day_history.json").string() << "\n";
    std::string day_text = render_history(day);

    std::string routing_block;
    {
        std::ifstream is(data / "routing_few_shot.txt");
        routing_block.assign((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    }

    auto record_text_question = [&](const std::string& question, const std::string& answer,
                                    const std::string& explanation) {
        Question q = Question::of(question);
        scripted->script(prompts::route(routing_block, question), "text | -");
        route_question(q, lm, routing_block);
        std::string qa_prompt = prompts::question_answer(day_text, question);
        scripted->script(qa_prompt, answer);
        std::string got = answer_question(day_text, q, lm);
        scripted->script(prompts::explanation(day_text, question, got), explanation);
        explain_answer(day_text, q, got, lm);
        return qa_prompt;
    };

    std::string dinner_prompt =
        record_text_question("did I eat dinner today?", "yes I ate dinner today.",
                             "I was seen eating a sandwich in a kitchen at 5:27 PM.");
    write_file(golden / "question_answer_dinner.txt", dinner_prompt);
    write_file(golden / "explanation_dinner.txt",
               prompts::explanation(day_text, "did I eat dinner today?", "yes I ate dinner today."));
    record_text_question("did I drive today?", "no, I did not drive today.", "I was at home all day.");
    write_file(golden / "route_remote_control.txt",
               prompts::route(routing_block, "where did I leave my remote control"));

    std::string day_summary_prompt = prompts::day_summary(day_text);
    write_file(golden / "day_summary.txt", day_summary_prompt);
    scripted->script(day_summary_prompt,
                     "I slept in a bed, made coffee, watched TV, did laundry, received a package, "
                     "bench pressed, showered, ate a sandwich, worked on a computer, and drank "
                     "wine.");
    summarize_day(day_text, lm);

    // --- Forecasting ---------------------------------------------------------------
    WorldStateHistory forecast_log;
    forecast_log.events = {
        event(at(13, 46), "I am eating a sandwich in a kitchen."),
        event(at(14, 18), "I am checking time and working on a laptop in a clean room."),
        event(at(14, 49), "I am buying produce from a grocery store or market."),
    };
    std::string forecast_text = render_history(forecast_log);
    std::string forecast_prompt = prompts::forecast(forecast_text, clock_12h(at(15, 21)));
    write_file(golden / "forecast.txt", forecast_prompt);
    scripted->script(forecast_prompt,
                     " I am driving a car.\n4:03 PM: I am in a park and see a playground.\n4:35 "
                     "PM: I am in a home and see a television.");
    forecast(forecast_text, {at(15, 21), at(16, 3), at(16, 35)}, lm);

    // --- Corrections ------------------------------------------------------------------
    std::string campfire_context =
        "Where am I? outdoor cabin, campsite, outdoor inn. What do I see? fire, marshmallow, fire "
        "iron, hearth, fireside, camp chair. What am I doing? Commonsense suggests: roasting "
        "marshmallows, sitting around the fire, chatting. Most likely: sitting around the fire.";
    std::string campfire_original =
        "I am camping and enjoying the company of my friends around the fire.";
    std::string campfire_correction =
        "It was actually my family, not friends, sitting around the fire.";
    std::string correction_prompt =
        prompts::correction(campfire_context, campfire_original, campfire_correction);
    write_file(golden / "correction_campfire.txt", correction_prompt);
    scripted->script(correction_prompt,
                     "I am camping with my family and enjoying the company of them around the fire.");
    apply_correction(campfire_context, campfire_original, campfire_correction, lm);

    // --- Transcript summarization -------------------------------------------------------
    std::string transcript =
        "today we are making a simple tomato pasta, start by boiling the water, salt it well, and "
        "while that heats up chop the garlic and onions";
    std::string transcript_prompt = prompts::transcript_summary(transcript);
    write_file(golden / "transcript_summary.txt", transcript_prompt);

    // --- Recursive summarization chunk prompt ----------------------------------------------
    WorldStateHistory chunk;
    chunk.events = {event(at(9, 0), "I am making coffee in a kitchen."),
                    event(at(9, 30), "I am watching TV in a living room.")};
    write_file(golden / "chunk_summary.txt", prompts::chunk_summary(render_history(chunk)));

    std::cout << "replay fixtures recorded: " << store.size() << "\n";
    return 0;
}
