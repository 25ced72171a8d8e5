// Static instruction panel content, one entry per task kind. Condensed
// restatements of the annotation guidelines, not verbatim screens.

export const INSTRUCTIONS: Record<string, string> = {
  label: `
    <p>Read the premise, then decide what the hypothesis sentence says
    about the same situation:</p>
    <ul>
      <li><strong>E</strong>: the hypothesis is definitely correct if the premise is.</li>
      <li><strong>C</strong>: the hypothesis is definitely incorrect if the premise is.</li>
      <li><strong>N</strong>: the hypothesis might be correct, might not; the premise does not settle it.</li>
      <li><strong>I don't understand</strong>: only when one of the sentences is garbled or unreadable.</li>
    </ul>
    <p>Judge meaning, not wording. Keys 1-4 select a choice.</p>`,
  validate: `
    <p>This pair was labeled in an earlier round and is being
    double-checked. Give your own independent judgment with the same
    four choices; do not try to guess what the earlier annotator said.</p>
    <p>Keys 1-4 select a choice.</p>`,
  write: `
    <p>Read the premise, then write three new sentences about the same
    situation:</p>
    <ul>
      <li>one that is <strong>definitely correct</strong> given the premise,</li>
      <li>one that is <strong>definitely incorrect</strong> given the premise,</li>
      <li>one that <strong>might be correct</strong> but is not settled by it.</li>
    </ul>
    <p>Each sentence must stand on its own and must not repeat the
    premise. All three fields are required.</p>`,
};

// Display names for label tokens; unknown tokens fall back to the raw
// token so the choices always match what the service enumerates.
export const LABEL_TITLES: Record<string, string> = {
  E: 'Definitely correct',
  C: 'Definitely incorrect',
  N: 'Might be correct',
  IDU: "I don't understand",
};

export const WRITE_TITLES: Record<string, string> = {
  entail_text: 'Definitely correct',
  contra_text: 'Definitely incorrect',
  neutral_text: 'Might be correct',
};
