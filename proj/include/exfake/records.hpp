#pragma once

#include <string>

#include "exfake/common.hpp"

namespace exfake {

// The unit under analysis.
struct Post {
  std::string id;
  std::string text;
  std::string author;
  Timestamp published_at{};

  void validate() const {
    if (text.empty()) throw ValidationError("post text is empty");
  }
};

// A claim published by a trusted fact-checking site.
struct FactCheckArticle {
  std::string id;
  std::string claim_text;
  std::string author;
  Timestamp published_at{};
  std::string url;

  void validate() const {
    if (id.empty()) throw ValidationError("article id is empty");
    if (claim_text.empty()) {
      throw ValidationError("article '" + id + "' has empty claim_text");
    }
  }
};

// A post from the official account of a registry entity.
struct EntityPost {
  std::string id;
  std::string handle;
  std::string text;
  Timestamp published_at{};
  std::string url;

  void validate() const {
    if (id.empty()) throw ValidationError("entity post id is empty");
    if (handle.empty()) {
      throw ValidationError("entity post '" + id + "' has no handle");
    }
    if (text.empty()) {
      throw ValidationError("entity post '" + id + "' has empty text");
    }
  }
};

}  // namespace exfake
