#pragma once

#include <string>
#include <vector>

namespace socratic::prompts {

// Renderers for every fixed-format prompt in the system. Tests hold golden
// copies of rendered instances; treat any byte change here as a contract
// change.

std::string join_labels(const std::vector<std::string>& labels);

// "Places: p1, p2, p3. Objects: o1, o2, o3. Activities:"
std::string activities(const std::vector<std::string>& places,
                       const std::vector<std::string>& objects);

// "If I am {activity}, objects that I am likely to see include:"
std::string expand_objects(const std::string& activity);

// "If I am {activity}, places that I am likely to be include:"
std::string expand_places(const std::string& activity);

// "I am in a .... I see a .... I am {activity}. Question: What am I doing?
//  Answer: I am most likely"
std::string moment_summary(const std::vector<std::string>& places,
                           const std::vector<std::string>& objects,
                           const std::string& activity);

// "Places: .... Objects: ....  Activities: ....  {n} Possible Sounds:"
std::string possible_sounds(const std::vector<std::string>& places,
                            const std::vector<std::string>& objects,
                            const std::vector<std::string>& activities, int n_sounds);

// "I am in a: .... I see a: ....  I think I hear {sound} I am: {activity}.
//  Summary: I am most likely"
std::string moment_summary_with_audio(const std::vector<std::string>& places,
                                      const std::vector<std::string>& objects,
                                      const std::string& sound, const std::string& activity);

// The "intelligent image captioning bot" prompt.
std::string internet_caption(const std::string& image_type, const std::string& people_phrase,
                             const std::vector<std::string>& places,
                             const std::vector<std::string>& objects);

// "{history}\nQ: {question} A:"
std::string question_answer(const std::string& history_text, const std::string& question);

// "{history}\nQ: {question} A: {answer}\nThis is because:"
std::string explanation(const std::string& history_text, const std::string& question,
                        const std::string& answer);

// "{history}\nSummary of my day:"
std::string day_summary(const std::string& history_text);

// "{history}\n{clock}:"
std::string forecast(const std::string& history_text, const std::string& clock);

// "Context: ...\nOriginal Summary: ...\nCorrections: ...\nCorrected Summary:"
std::string correction(const std::string& context_text, const std::string& original_summary,
                       const std::string& correction_text);

// "I am an intelligent video captioning bot. I hear a person saying: ..."
std::string transcript_summary(const std::string& transcript);

// "{few_shot_block}\nQuestion: {question}\nSearch:"
std::string route(const std::string& few_shot_block, const std::string& question);

// "{rendered chunk}\nSummary of this period:"
std::string chunk_summary(const std::string& rendered_chunk);

}  // namespace socratic::prompts
