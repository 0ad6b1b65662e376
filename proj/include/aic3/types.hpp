#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace aic3 {

enum class Protocol { btc, ptc };
enum class QuestionKind { same_codec, cross_codec, bias, trap };
enum class Answer { left, right, not_sure };

std::string_view to_string(Protocol p);
std::string_view to_string(QuestionKind k);
std::string_view to_string(Answer a);

// Parsers accept the lowercase names produced by to_string and throw InputError otherwise.
Protocol parse_protocol(std::string_view s);
QuestionKind parse_kind(std::string_view s);
Answer parse_answer(std::string_view s);

// Codec id reserved for the uncompressed source image (level 0).
inline constexpr std::string_view kSourceCodec = "source";
inline constexpr int kMaxLevel = 10;

// Identity of one stimulus within a study. Level 0 is always the source, so
// make_key normalizes the codec of level-0 stimuli to "source".
struct StimulusKey {
  std::string source_id;
  std::string codec_id;
  int level = 0;

  bool is_source() const { return level == 0; }
  auto operator<=>(const StimulusKey&) const = default;
};

StimulusKey make_key(std::string source_id, std::string codec_id, int level);

std::string to_string(const StimulusKey& key);

}  // namespace aic3
