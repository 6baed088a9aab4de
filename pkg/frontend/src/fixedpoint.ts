// Fixed-point decimal strings, scale 10^4, mirroring the service's wire
// format. All arithmetic is on bigints so budget totals computed in the
// browser agree byte-for-byte with the totals the service validates —
// floats never touch these values.

export const FP_DIGITS = 4;
export const FP_SCALE = 10000n;

const DIGITS_ONLY = /^[0-9]*$/;

/** Parse a scale-10^4 decimal string ("2500.0000", "7", ".5") to bigint.
 *
 * Accepts at most four fractional digits and requires at least one digit
 * overall; signs, exponents, separators, and non-ASCII digits are
 * rejected. Throws RangeError with a human-readable reason.
 */
export function parseFp(text: string): bigint {
  const clean = text.trim();
  if (clean.includes("-")) {
    throw new RangeError(`fixed-point amounts cannot be negative: ${JSON.stringify(text)}`);
  }
  const dot = clean.indexOf(".");
  const whole = dot === -1 ? clean : clean.slice(0, dot);
  const frac = dot === -1 ? "" : clean.slice(dot + 1);
  if (frac.length > FP_DIGITS) {
    throw new RangeError(`more than ${FP_DIGITS} fractional digits: ${JSON.stringify(text)}`);
  }
  if (!DIGITS_ONLY.test(whole) || !DIGITS_ONLY.test(frac) || whole.length + frac.length === 0) {
    throw new RangeError(`not a fixed-point decimal: ${JSON.stringify(text)}`);
  }
  const wholePart = whole === "" ? 0n : BigInt(whole);
  const fracPart = frac === "" ? 0n : BigInt(frac.padEnd(FP_DIGITS, "0"));
  return wholePart * FP_SCALE + fracPart;
}

/** Format a bigint as the canonical "W.FFFF" wire string. */
export function formatFp(value: bigint): string {
  if (value < 0n) {
    throw new RangeError("fixed-point amounts cannot be negative");
  }
  const frac = (value % FP_SCALE).toString().padStart(FP_DIGITS, "0");
  return `${value / FP_SCALE}.${frac}`;
}

/** True when the text parses as a fixed-point amount. */
export function isFp(text: string): boolean {
  try {
    parseFp(text);
    return true;
  } catch {
    return false;
  }
}

/** Sum fixed-point strings into the canonical string form. */
export function sumFp(values: Iterable<string>): string {
  let total = 0n;
  for (const value of values) {
    total += parseFp(value);
  }
  return formatFp(total);
}

/** Exact equality of two fixed-point strings (canonicalizes both sides). */
export function fpEquals(a: string, b: string): boolean {
  return parseFp(a) === parseFp(b);
}
