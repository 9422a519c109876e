// Tokenizer mirroring the service side: decimals stay whole ("0.65"),
// punctuation detaches ("ng/mL" -> ng / mL), asterisk runs stay together.

const TOKEN_RE = /\d+\.\d+|\w+|\*+|[^\w\s]/g;

export function tokenize(text: string): string[] {
  return text.match(TOKEN_RE) ?? [];
}

export interface TokenSpan {
  token: string;
  start: number;
  end: number;
}

export function tokenSpans(text: string): TokenSpan[] {
  const spans: TokenSpan[] = [];
  for (const match of text.matchAll(TOKEN_RE)) {
    spans.push({
      token: match[0],
      start: match.index ?? 0,
      end: (match.index ?? 0) + match[0].length,
    });
  }
  return spans;
}
