// Batch predictor used by the tests: doubles every value but refuses
// negatives, which exercises the per-request error path.
export function predict(rows) {
  return rows.map((row) =>
    row.map((v) => {
      if (v < 0) throw new Error("negative input rejected");
      return 2 * v;
    }),
  );
}
