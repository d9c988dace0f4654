// Copyright 2026 The Spanner Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spanner/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace spanner {
namespace {

struct DecodedTag {
  char prefix = 'O';
  std::string label;
};

std::string_view AllowedPrefixes(TagScheme scheme) {
  return scheme == TagScheme::kBIOES ? "BIES" : "BI";
}

DecodedTag SplitTag(std::string_view tag, TagScheme scheme, std::size_t pos) {
  if (tag == kOutsideLabel) return {};
  if (tag.size() < 3 || tag[1] != '-' ||
      AllowedPrefixes(scheme).find(tag[0]) == std::string_view::npos) {
    throw Error("malformed tag '" + std::string(tag) + "' at position " +
                std::to_string(pos) + " for scheme " +
                std::string(TagSchemeName(scheme)));
  }
  return {tag[0], std::string(tag.substr(2))};
}

[[noreturn]] void IllegalTransition(std::string_view tag, std::size_t pos) {
  throw Error("illegal transition to '" + std::string(tag) + "' at position " +
              std::to_string(pos));
}

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

bool IsBlank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) {
    return c == ' ' || c == '\t' || c == '\r';
  });
}

}  // namespace

TagScheme ParseTagScheme(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  if (upper == "BIO" || upper == "IOB2") return TagScheme::kBIO;
  if (upper == "BIOES" || upper == "IOBES") return TagScheme::kBIOES;
  if (upper == "IOB1" || upper == "IOB") return TagScheme::kIOB1;
  throw Error("unknown tag scheme '" + std::string(name) + "'");
}

std::string_view TagSchemeName(TagScheme scheme) {
  switch (scheme) {
    case TagScheme::kBIO: return "BIO";
    case TagScheme::kBIOES: return "BIOES";
    case TagScheme::kIOB1: return "IOB1";
  }
  return "?";
}

std::size_t Corpus::num_entities() const {
  std::size_t total = 0;
  for (const auto &s : sentences) total += s.gold_spans.size();
  return total;
}

int Corpus::label_index(std::string_view label) const {
  auto it = std::find(label_set.begin(), label_set.end(), label);
  return it == label_set.end() ? -1
                               : static_cast<int>(it - label_set.begin());
}

SpanList TagsToSpans(std::span<const std::string> tags, TagScheme scheme,
                     DecodeMode mode) {
  const bool strict = mode == DecodeMode::kStrict;
  SpanList spans;
  std::optional<Span> open;
  auto close = [&](int end) {
    if (!open) return;
    open->end = end;
    spans.push_back(std::move(*open));
    open.reset();
  };

  for (std::size_t k = 0; k < tags.size(); ++k) {
    const int pos = static_cast<int>(k) + 1;
    const DecodedTag tag = SplitTag(tags[k], scheme, pos);
    const bool continues = open && open->label == tag.label;
    switch (tag.prefix) {
      case 'O':
        if (open && strict && scheme == TagScheme::kBIOES)
          IllegalTransition(tags[k], pos);
        close(pos - 1);
        break;
      case 'B':
        if (open && strict && scheme == TagScheme::kBIOES)
          IllegalTransition(tags[k], pos);
        close(pos - 1);
        open = Span{pos, pos, tag.label};
        break;
      case 'S':
        if (open && strict) IllegalTransition(tags[k], pos);
        close(pos - 1);
        spans.push_back(Span{pos, pos, tag.label});
        break;
      case 'I':
        if (continues) break;
        if (strict && scheme != TagScheme::kIOB1)
          IllegalTransition(tags[k], pos);
        close(pos - 1);
        open = Span{pos, pos, tag.label};
        break;
      case 'E':
        if (continues) {
          close(pos);
          break;
        }
        if (strict) IllegalTransition(tags[k], pos);
        close(pos - 1);
        spans.push_back(Span{pos, pos, tag.label});
        break;
    }
  }
  if (open && strict && scheme == TagScheme::kBIOES)
    throw Error("entity '" + open->label + "' not terminated at end of sequence");
  close(static_cast<int>(tags.size()));
  return spans;
}

std::vector<std::string> SpansToTags(std::span<const Span> spans, int n,
                                     TagScheme scheme) {
  SpanList sorted(spans.begin(), spans.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const Span &a, const Span &b) { return a.begin < b.begin; });
  std::vector<std::string> tags(static_cast<std::size_t>(std::max(n, 0)),
                                kOutsideLabel);
  int last_end = 0;
  for (const Span &s : sorted) {
    if (s.begin < 1 || s.end < s.begin || s.end > n)
      throw Error("span [" + std::to_string(s.begin) + "," +
                  std::to_string(s.end) + "] outside sentence of length " +
                  std::to_string(n));
    if (s.begin <= last_end)
      throw Error("overlapping spans at position " + std::to_string(s.begin));
    last_end = s.end;
    for (int i = s.begin; i <= s.end; ++i) {
      char prefix = i == s.begin ? 'B' : 'I';
      if (scheme == TagScheme::kBIOES) {
        if (s.begin == s.end) prefix = 'S';
        else if (i == s.end) prefix = 'E';
      }
      tags[i - 1] = std::string(1, prefix) + "-" + s.label;
    }
  }
  return tags;
}

void RebuildSpans(Corpus &corpus, DecodeMode mode) {
  std::map<std::string, int> labels;
  for (auto &sentence : corpus.sentences) {
    sentence.gold_spans =
        TagsToSpans(sentence.gold_tags, corpus.tag_scheme, mode);
    for (const auto &span : sentence.gold_spans) labels[span.label];
  }
  corpus.label_set.assign(1, kOutsideLabel);
  for (const auto &[label, unused] : labels) corpus.label_set.push_back(label);
}

Corpus ParseConll(std::string_view text, const ConllOptions &options) {
  Corpus corpus;
  corpus.tag_scheme = options.scheme;
  Sentence current;
  std::vector<std::size_t> sentence_lines;
  std::vector<std::size_t> current_lines;
  std::size_t num_columns = 0;

  auto flush = [&] {
    if (current.tokens.empty()) return;
    corpus.sentences.push_back(std::move(current));
    sentence_lines.push_back(current_lines.front());
    current = Sentence{};
    current_lines.clear();
  };

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t stop = text.find('\n', start);
    if (stop == std::string_view::npos) stop = text.size();
    std::string_view line = text.substr(start, stop - start);
    start = stop + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (IsBlank(line)) {
      flush();
      continue;
    }
    auto fields = SplitFields(line);
    if (fields.front().starts_with("-DOCSTART-")) {
      flush();
      continue;
    }
    if (num_columns == 0) num_columns = fields.size();
    if (fields.size() != num_columns)
      throw ParseError(line_no, "expected " + std::to_string(num_columns) +
                                    " columns, found " +
                                    std::to_string(fields.size()));
    const int ncol = static_cast<int>(num_columns);
    const int token_col =
        options.token_col < 0 ? ncol + options.token_col : options.token_col;
    const int tag_col =
        options.tag_col < 0 ? ncol + options.tag_col : options.tag_col;
    if (token_col < 0 || token_col >= ncol || tag_col < 0 || tag_col >= ncol)
      throw ParseError(line_no, "column index out of range for " +
                                    std::to_string(ncol) + " columns");
    current.tokens.emplace_back(fields[token_col]);
    current.gold_tags.emplace_back(fields[tag_col]);
    current_lines.push_back(line_no);
  }
  flush();

  std::map<std::string, int> labels;
  for (std::size_t i = 0; i < corpus.sentences.size(); ++i) {
    auto &sentence = corpus.sentences[i];
    try {
      sentence.gold_spans =
          TagsToSpans(sentence.gold_tags, options.scheme, options.mode);
    } catch (const ParseError &) {
      throw;
    } catch (const Error &e) {
      throw ParseError(sentence_lines[i], e.what());
    }
    if (options.scheme == TagScheme::kIOB1)
      sentence.gold_tags = SpansToTags(sentence.gold_spans, sentence.size(),
                                       TagScheme::kBIO);
    for (const auto &span : sentence.gold_spans) labels[span.label];
  }
  if (options.scheme == TagScheme::kIOB1) corpus.tag_scheme = TagScheme::kBIO;
  for (const auto &[label, unused] : labels) corpus.label_set.push_back(label);
  return corpus;
}

Corpus ReadConllFile(const std::string &path, const ConllOptions &options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return ParseConll(buffer.str(), options);
  } catch (const ParseError &e) {
    throw ParseError(e.line(), path + ": " + e.what());
  }
}

std::string WriteConll(const Corpus &corpus) {
  std::string out;
  for (const auto &sentence : corpus.sentences) {
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
      out += sentence.tokens[i];
      out += ' ';
      out += sentence.gold_tags[i];
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

std::string WriteConll(const Corpus &corpus, const CorpusSpans &spans,
                       TagScheme scheme) {
  if (spans.size() != corpus.size())
    throw Error("span lists do not align with corpus");
  std::string out;
  for (std::size_t s = 0; s < corpus.size(); ++s) {
    const auto &sentence = corpus.sentences[s];
    const auto tags = SpansToTags(spans[s], sentence.size(), scheme);
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
      out += sentence.tokens[i];
      out += ' ';
      out += tags[i];
      out += '\n';
    }
    out += '\n';
  }
  return out;
}

Vocab::Vocab() : words_{"<pad>", "<unk>"} {
  ids_.emplace(words_[0], kPad);
  ids_.emplace(words_[1], kUnk);
}

Vocab Vocab::Build(const Corpus &train, int min_count) {
  std::unordered_map<std::string, int> counts;
  for (const auto &sentence : train.sentences)
    for (const auto &token : sentence.tokens) ++counts[token];
  std::vector<std::pair<std::string, int>> ranked;
  for (auto &[word, count] : counts)
    if (count >= min_count) ranked.emplace_back(word, count);
  std::sort(ranked.begin(), ranked.end(), [](const auto &a, const auto &b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> words;
  words.reserve(ranked.size());
  for (auto &entry : ranked) words.push_back(std::move(entry.first));
  return FromWords(std::move(words));
}

Vocab Vocab::FromWords(std::vector<std::string> words) {
  Vocab vocab;
  for (auto &word : words) {
    if (word.empty()) throw Error("empty word in vocabulary");
    if (vocab.ids_.count(word)) continue;
    vocab.ids_.emplace(word, static_cast<std::int32_t>(vocab.words_.size()));
    vocab.words_.push_back(std::move(word));
  }
  return vocab;
}

std::int32_t Vocab::id(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  return it == ids_.end() ? kUnk : it->second;
}

bool Vocab::contains(std::string_view word) const {
  auto it = ids_.find(std::string(word));
  return it != ids_.end() && it->second > kUnk;
}

std::vector<std::int32_t> Vocab::Encode(
    std::span<const std::string> tokens) const {
  std::vector<std::int32_t> ids;
  ids.reserve(tokens.size());
  for (const auto &token : tokens) ids.push_back(id(token));
  return ids;
}

}  // namespace spanner
