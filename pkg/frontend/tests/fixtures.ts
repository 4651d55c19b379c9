import type { DesignDoc } from '../src/types.js';

export const APPENDIX_DOC: DesignDoc = {
  canvas: { width: 940, height: 788 },
  elements: [
    { index: 0, modality: 'image', asset: 'background.png', x: 470, y: 394, width: 940, height: 806 },
    { index: 1, modality: 'image', asset: 'photo.png', x: 470, y: 394, width: 873, height: 721 },
    { index: 2, modality: 'image', asset: 'badge.png', x: 598, y: 147, width: 443, height: 418 },
    {
      index: 3,
      modality: 'text',
      content: 'STOP DREAMING START DOING',
      x: 583,
      y: 394,
      width: 441,
      height: 336,
      angle: 0,
      font_size: 70,
      text_align: 'left',
    },
  ],
};
