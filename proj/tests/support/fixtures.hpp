#pragma once

#include "simulmt/core.hpp"

namespace simulmt::testing {

// Streaming annotation of "And this made me sad": the annotator reads two
// words before the first write, then alternates.
inline const TokenSeq kTable2Source{"And", "this", "made", "me", "sad"};
inline const TokenSeq kTable2Target{"这", "使", "我", "难过"};

inline const char* const kTable2Record =
    R"({"id":"table2","mode":"streaming","actions":[["R","And"],["R","this"],["W","这"],)"
    R"(["R","made"],["W","使"],["R","me"],["W","我"],["R","sad"],["W","难过"]]})";

inline StreamLog table2_log(std::string id = "table2") {
  return StreamLog(std::move(id), LogMode::kStreaming,
                   {Read{"And"}, Read{"this"}, Write{"这"}, Read{"made"}, Write{"使"},
                    Read{"me"}, Write{"我"}, Read{"sad"}, Write{"难过"}});
}

}  // namespace simulmt::testing
