// Normalizes a sentence, trains both tokenizers on the bundled corpus and
// compares sequence lengths against the codepoint baseline.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "tibtts/normalize.hpp"
#include "tibtts/script.hpp"
#include "tibtts/tokenizer.hpp"

int main() {
  using namespace tibtts;

  const normalize::Normalizer reader(normalize::NormalizationConfig::synthesis_default());
  const auto text = reader("ལོ་2024་ལ་སློབ་མ་15་ཡོད།");
  std::cout << "raw:        " << text.raw << "\n"
            << "normalized: " << text.normalized << "\n"
            << "syllables:  " << script::count_syllables(text.normalized) << "\n\n";

  const normalize::Normalizer cleaner;
  std::vector<std::string> corpus;
  std::ifstream in(std::string(TIBTTS_DATA_DIR) + "/corpus/sample.txt");
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) corpus.push_back(cleaner(line).normalized);
  }

  const tokenizer::Tokenizer syllable(tokenizer::SyllableVocab::build(corpus, 1));
  const tokenizer::Tokenizer bpe(tokenizer::BpeModel::train(corpus, 256));
  const auto seq = bpe.encode(corpus.front());
  std::cout << corpus.front() << "\n  bpe ids: " << tokenizer::format_ids(seq.ids)
            << "\n  decoded: " << bpe.decode(seq.ids) << "\n\n";

  const tokenizer::Tokenizer* models[] = {&syllable, &bpe};
  for (const auto& s : tokenizer::corpus_token_report(corpus, models)) {
    std::cout << s.strategy << ": " << s.mean_tokens_per_utterance << " tokens/utterance\n";
  }
}
