# Generated by nnport 0.1.0: tf/subclassing -> tf/subclassing, pivot sha256 f1c011b953d12b299df6f03d62ead9a46a378045677389698a2c2c40fef4fe52
import tensorflow as tf
from tensorflow import keras
from tensorflow.keras import layers

INPUT_SHAPE = (100,)
DATASETS = {
    "imdb": ("data/imdb", "classification", "sequences"),
    "sst2": ("data/sst2", "classification", "sequences"),
}


class CNNRNN(keras.Model):
    def __init__(self):
        super().__init__()
        self.embedding = layers.Embedding(input_dim=10000, output_dim=128)
        self.conv = layers.Conv1D(filters=64, kernel_size=(5,), strides=(1,), padding="valid", activation="relu")
        self.pool = layers.MaxPooling1D(pool_size=(2,), strides=(2,), padding="valid")
        self.conv_dropout = layers.Dropout(rate=0.2)
        self.conv_lstm = layers.LSTM(units=64)
        self.rnn = layers.Bidirectional(layers.LSTM(units=64))
        self.rnn_dropout = layers.Dropout(rate=0.2)
        self.fc1 = layers.Dense(units=64, activation="relu")
        self.fc_dropout = layers.Dropout(rate=0.5)
        self.fc2 = layers.Dense(units=32, activation="relu")
        self.out = layers.Dense(units=1, activation="sigmoid")

    def call(self, inputs):
        embedding = self.embedding(inputs)
        conv = self.conv(embedding)
        pool = self.pool(conv)
        conv_dropout = self.conv_dropout(pool)
        conv_lstm = self.conv_lstm(conv_dropout)
        rnn = self.rnn(embedding)
        rnn_dropout = self.rnn_dropout(rnn)
        merged = tf.concat([conv_lstm, rnn_dropout], axis=-1)
        fc1 = self.fc1(merged)
        fc_dropout = self.fc_dropout(fc1)
        fc2 = self.fc2(fc_dropout)
        out = self.out(fc2)
        return out


def train(model, x, y):
    model.compile(
        optimizer=keras.optimizers.Adam(learning_rate=0.001),
        loss=keras.losses.BinaryCrossentropy(from_logits=False),
        metrics=["accuracy"],
    )
    model.fit(x, y, batch_size=64, epochs=10)
    return model.evaluate(x, y)
