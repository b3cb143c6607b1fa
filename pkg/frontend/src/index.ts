export * from "./api.js";
export * from "./convergence.js";
export * from "./rosterGrid.js";
export * from "./diff.js";
export * from "./forms.js";
