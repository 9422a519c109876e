// Value classification, ported from the service so highlighting matches
// what the pipeline treats as tabular values.

export type ValueKind =
  | "Integer"
  | "Float"
  | "RunId"
  | "StringValue"
  | "TableId"
  | "EmphasisMark";

const CLOSED_CLASS_WORDS = new Set(`
a an the this that these those some any each every no all both few many
i you he she it we they me him her us them my your his its our their
and or but nor so yet for if then else when while because although since
unless until whether though whereas moreover however therefore thus hence
of in on at by to from with without within into onto upon about above
below under over between among during before after through across against
along around behind beside beyond near off out up down per via
is are was were be been being am do does did done doing have has had
having will would shall should can could may might must not
as than too very also only just more most less least much such same other
another either neither rather quite respectively eg ie etc
there here where which who whom whose what why how
observed presented reported shown evaluated analyzed measured described
respective following according based using used given
`.split(/\s+/).filter(Boolean));

const ABBREVIATIONS = new Set([
  "ADA", "CV", "CVs", "QC", "SD", "LLOQ", "ULOQ", "ELISA", "PCR", "DNA", "RNA",
]);

const EMPHASIS_RE = /^\*+$/;
const INTEGER_RE = /^\d+$/;
const FLOAT_RE = /^\d+\.\d+$/;
const TABLE_ID_RE = /^Table[A-Za-z0-9]+$/;
const ALNUM_MIXED_RE = /^(?=.*[A-Za-z])(?=.*\d)[A-Za-z0-9]+$/;
const ALPHA_RE = /^[A-Za-z]+$/;

export function classifyValue(token: string): ValueKind | null {
  if (!token) throw new Error("token must be nonempty");
  if (EMPHASIS_RE.test(token)) return "EmphasisMark";
  if (INTEGER_RE.test(token)) return "Integer";
  if (FLOAT_RE.test(token)) return "Float";
  if (TABLE_ID_RE.test(token)) return "TableId";
  if (ABBREVIATIONS.has(token)) return "StringValue";
  if (ALNUM_MIXED_RE.test(token)) return "RunId";
  if (ALPHA_RE.test(token)) {
    if (CLOSED_CLASS_WORDS.has(token.toLowerCase())) return null;
    if (token[0] === token[0].toUpperCase()) return "StringValue";
  }
  return null;
}
