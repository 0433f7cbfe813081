#include "scrapnet/topics.hpp"

namespace scrapnet {

namespace {

// Common English function words and high-frequency general vocabulary,
// followed by fillers typical of registry business descriptions.
constexpr const char* kStopwords[] = {
    "about", "above", "according", "across", "actually", "after", "again", "against", "ago", "ahead", "almost",
    "alone", "along", "already", "also", "although", "always", "among", "amount", "another", "anyone", "anything",
    "around", "away", "back", "became", "because", "become", "been", "before", "began", "behind", "being",
    "believe", "below", "best", "better", "between", "beyond", "both", "bring", "brought", "called", "came",
    "cannot", "case", "certain", "change", "clear", "come", "coming", "could", "course", "days", "despite",
    "does", "doing", "done", "down", "during", "each", "early", "either", "else", "end", "enough", "even",
    "ever", "every", "example", "face", "fact", "feel", "felt", "few", "find", "first", "five", "following",
    "former", "found", "four", "free", "from", "full", "further", "gave", "general", "getting", "give", "given",
    "going", "gone", "good", "got", "great", "group", "half", "hand", "happen", "hard", "have", "having", "head",
    "hear", "heard", "help", "hence", "here", "herself", "high", "himself", "however", "idea", "important",
    "including", "inside", "instead", "into", "itself", "just", "keep", "kind", "knew", "know", "known", "large",
    "last", "late", "later", "least", "leave", "left", "less", "like", "likely", "little", "long", "look",
    "made", "make", "making", "many", "matter", "maybe", "mean", "might", "more", "most", "mostly", "much",
    "must", "myself", "near", "nearly", "need", "never", "next", "nothing", "number", "often", "once", "only",
    "onto", "other", "others", "otherwise", "ourselves", "over", "part", "past", "perhaps", "place", "point",
    "possible", "put", "quite", "rather", "real", "really", "recent", "recently", "right", "said", "same",
    "says", "second", "seem", "seen", "several", "shall", "should", "show", "side", "since", "small", "some",
    "someone", "something", "sometimes", "soon", "still", "such", "sure", "take", "taken", "tell", "than",
    "that", "their", "them", "themselves", "then", "there", "therefore", "these", "they", "thing", "things",
    "think", "this", "those", "though", "three", "through", "thus", "time", "today", "together", "told", "took",
    "toward", "towards", "turn", "under", "until", "upon", "used", "using", "very", "want", "well", "went",
    "were", "what", "whatever", "when", "where", "whether", "which", "while", "whole", "whom", "whose", "will",
    "with", "within", "without", "would", "year", "years", "your", "yourself",
    // registry fillers
    "activity", "activities", "area", "areas", "based", "business", "businesses", "client", "clients",
    "companies", "company", "customer", "customers", "description", "engaged", "established", "founded",
    "headquartered", "include", "includes", "industry", "industries", "limited", "located", "main", "mainly",
    "market", "markets", "offer", "offers", "operate", "operates", "operating", "other", "primarily", "primary",
    "principal", "product", "products", "provide", "provides", "providing", "range", "related", "service",
    "services", "solution", "solutions", "specialise", "specialises", "specialize", "specializes", "subsidiary",
    "various", "wide",
};

}  // namespace

const StopwordSet& default_stopwords() {
  static const StopwordSet set(std::begin(kStopwords), std::end(kStopwords));
  return set;
}

}  // namespace scrapnet
