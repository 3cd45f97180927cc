/** Deterministic colors: a unit's color depends only on its roster index,
 * a cluster's on its id, so re-renders and reloads never reshuffle hues. */

const UNIT_PALETTE = [
  "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
  "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#86bcb6", "#d37295",
];

const CLUSTER_PALETTE = [
  "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02",
];

export function unitColor(rosterIndex: number): string {
  return UNIT_PALETTE[((rosterIndex % UNIT_PALETTE.length) + UNIT_PALETTE.length)
    % UNIT_PALETTE.length];
}

export function clusterColor(clusterId: number): string {
  return CLUSTER_PALETTE[((clusterId % CLUSTER_PALETTE.length) + CLUSTER_PALETTE.length)
    % CLUSTER_PALETTE.length];
}
