#include "socratic/prompts.hpp"

#include "socratic/common.hpp"

namespace socratic::prompts {

std::string join_labels(const std::vector<std::string>& labels) {
    std::string out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i) out += ", ";
        out += labels[i];
    }
    return out;
}

std::string activities(const std::vector<std::string>& places,
                       const std::vector<std::string>& objects) {
    return "Places: " + join_labels(places) + ". Objects: " + join_labels(objects) +
           ". Activities:";
}

std::string expand_objects(const std::string& activity) {
    return "If I am " + activity + ", objects that I am likely to see include:";
}

std::string expand_places(const std::string& activity) {
    return "If I am " + activity + ", places that I am likely to be include:";
}

std::string moment_summary(const std::vector<std::string>& places,
                           const std::vector<std::string>& objects,
                           const std::string& activity) {
    return "I am in a " + join_labels(places) + ". I see a " + join_labels(objects) + ". I am " +
           activity + ". Question: What am I doing? Answer: I am most likely";
}

std::string possible_sounds(const std::vector<std::string>& places,
                            const std::vector<std::string>& objects,
                            const std::vector<std::string>& activities, int n_sounds) {
    return "Places: " + join_labels(places) + ". Objects: " + join_labels(objects) +
           ".  Activities: " + join_labels(activities) + ".  " + std::to_string(n_sounds) +
           " Possible Sounds:";
}

std::string moment_summary_with_audio(const std::vector<std::string>& places,
                                      const std::vector<std::string>& objects,
                                      const std::string& sound, const std::string& activity) {
    return "I am in a: " + join_labels(places) + ". I see a: " + join_labels(objects) +
           ".  I think I hear " + sound + " I am: " + activity + ".  Summary: I am most likely";
}

std::string internet_caption(const std::string& image_type, const std::string& people_phrase,
                             const std::vector<std::string>& places,
                             const std::vector<std::string>& objects) {
    std::string place_clause;
    for (std::size_t i = 0; i < places.size(); ++i) {
        if (i) place_clause += places.size() > 1 && i + 1 == places.size() ? ", or " : ", ";
        place_clause += places[i];
    }
    return "I am an intelligent image captioning bot. This image is a " + image_type + ". There " +
           people_phrase + ". I think this photo was taken at a " + place_clause +
           ".  I think there might be a " + join_labels(objects) + " in this " + image_type +
           ". A creative short caption I can generate to describe this image is:";
}

std::string question_answer(const std::string& history_text, const std::string& question) {
    return history_text + "\nQ: " + question + " A:";
}

std::string explanation(const std::string& history_text, const std::string& question,
                        const std::string& answer) {
    return history_text + "\nQ: " + question + " A: " + answer + "\nThis is because:";
}

std::string day_summary(const std::string& history_text) {
    return history_text + "\nSummary of my day:";
}

std::string forecast(const std::string& history_text, const std::string& clock) {
    return history_text + "\n" + clock + ":";
}

std::string correction(const std::string& context_text, const std::string& original_summary,
                       const std::string& correction_text) {
    return "Context: " + context_text + "\nOriginal Summary: " + original_summary +
           "\nCorrections: " + correction_text + "\nCorrected Summary:";
}

std::string transcript_summary(const std::string& transcript) {
    return "I am an intelligent video captioning bot. I hear a person saying: \"" + transcript +
           "\". Q: What's a short video caption for this video? A: In this video,";
}

std::string route(const std::string& few_shot_block, const std::string& question) {
    std::string block = few_shot_block;
    while (!block.empty() && (block.back() == '\n' || block.back() == ' ')) block.pop_back();
    return block + "\nQuestion: " + question + "\nSearch:";
}

std::string chunk_summary(const std::string& rendered_chunk) {
    return rendered_chunk + "\nSummary of this period:";
}

}  // namespace socratic::prompts
